use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conswave::config::RunConfig;
use conswave::{emit_plotdata, run, PlotKind, RunError};

#[derive(Parser)]
#[command(name = "conswave", version, about = "Energy-conservative solutions of the variational wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write its artifacts.
    Run(RunArgs),
    /// Flatten a finished run into a plotting table.
    Plot {
        /// Directory of a completed run.
        #[arg(long = "run-dir")]
        run_dir: PathBuf,
        /// energy, isochrone or paths.
        #[arg(long)]
        kind: PlotKind,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML or JSON configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// linear, liquid-crystal, x-heterogeneous or custom.
    #[arg(long)]
    scenario: Option<String>,
    /// Data preset (pulse, hat, hat-steep, gauss-like, zero) or a JSON data file.
    #[arg(long)]
    data: Option<String>,
    #[arg(long = "T")]
    t_final: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `<name>=<on|off>` for oracle_compare, trace, holder or balance.
    #[arg(long = "check")]
    checks: Vec<String>,
    /// Reserved; the pipeline uses no randomness.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "K1")]
    k1: Option<f64>,
    #[arg(long = "K2")]
    k2: Option<f64>,
    /// Solve with the wavefront scheduler.
    #[arg(long)]
    parallel: bool,
}

fn build_config(a: &RunArgs) -> Result<RunConfig, RunError> {
    let mut c = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = &a.scenario {
        if *s != c.scenario.preset {
            c.scenario = conswave::config::ScenarioConfig { preset: s.clone(), ..Default::default() };
        }
    }
    if let Some(d) = &a.data {
        if d.ends_with(".json") {
            c.data = conswave::config::DataConfig { file: Some(PathBuf::from(d)), ..Default::default() };
        } else if *d != c.data.preset || c.data.file.is_some() {
            c.data = conswave::config::DataConfig { preset: d.clone(), ..Default::default() };
        }
    }
    if let Some(v) = a.t_final {
        c.t_final = v;
        // Derived times follow the new horizon unless the file fixed them.
        if a.config.is_none() {
            c.isochrone_times = None;
        }
    }
    if let Some(v) = a.h {
        c.h = v;
    }
    if a.dx.is_some() {
        c.dx = a.dx;
    }
    if a.dt.is_some() {
        c.dt = a.dt;
    }
    if let Some(o) = &a.out {
        c.output_dir = o.clone();
    }
    for spec in &a.checks {
        let (name, state) = spec
            .split_once('=')
            .ok_or_else(|| RunError::Config(format!("--check expects <name>=<on|off>, got `{spec}`")))?;
        let on = match state {
            "on" => true,
            "off" => false,
            _ => return Err(RunError::Config(format!("--check state must be on or off, got `{state}`"))),
        };
        c.checks.set(name, on)?;
    }
    if let Some(s) = a.seed {
        c.seed = s;
    }
    if a.k1.is_some() {
        c.scenario.k1 = a.k1;
    }
    if a.k2.is_some() {
        c.scenario.k2 = a.k2;
    }
    if a.parallel {
        c.parallel = true;
    }
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => build_config(&a).and_then(|c| run(&c)).map(|o| {
            print!("{}", conswave::pipeline::summary_text(&o.config, &o.diagnostics));
            println!("artifacts in {}", o.dir.display());
            o.passed()
        }),
        Command::Plot { run_dir, kind } => emit_plotdata(&run_dir, kind).map(|p| {
            println!("{}", p.display());
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
