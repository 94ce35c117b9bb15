//! One run: solve the lattice once, stream its rows through the collectors,
//! evaluate the enabled checks and write the artifacts.

use std::fs;
use std::path::PathBuf;

use conswave_core::chartrace::{
    compare_with_samples, trace_characteristic, trace_times, Family, SliceProvider, Slices, Source,
};
use conswave_core::coeffs::{derive, source_bound_constant, validate_bounds, CoefficientField, SampleBox};
use conswave_core::diagnostics::{
    balance_residual_from, balance_times, holder_from_samples, interaction_bound, total_energy, ColumnCollector,
    ConcentrationCollector, EnergyReport, InteractionCollector,
};
use conswave_core::fdoracle::{self, FdOptions};
use conswave_core::goursat::{march, GridRow, Lattice, SolveOptions, SolveStats, Solver};
use conswave_core::initdata::InitialData;
use conswave_core::physmap::{curve_isochrone, jacobian_det, IsoCollector, Isochrone};
use serde::Serialize;

use crate::config::RunConfig;
use crate::io::{self, GridDump};
use crate::presets::{build_data, build_field};
use crate::{solve_parallel, RunError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Measured value compared against `tolerance`, when one was obtained.
    pub value: Option<f64>,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn upper(name: &str, value: f64, tolerance: f64, detail: String) -> Self {
        Self { name: name.into(), passed: value <= tolerance, value: Some(value), tolerance, detail }
    }

    fn lower(name: &str, value: f64, tolerance: f64, detail: String) -> Self {
        Self { name: name.into(), passed: value >= tolerance, value: Some(value), tolerance, detail }
    }

    fn failed(name: &str, tolerance: f64, detail: String) -> Self {
        Self { name: name.into(), passed: false, value: None, tolerance, detail }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub nodes: usize,
    pub nx: usize,
    pub ny: usize,
    pub orientation: i8,
    pub max_residual: f64,
    pub max_iterations: u32,
    pub min_sigma: f64,
    pub min_eta: f64,
    pub max_t: f64,
    /// Nodes with `t ≤ T` and `|det| <` the configured tolerance.
    pub critical_nodes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyRow {
    pub t: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub drift: f64,
    pub e_ac_minus: f64,
    pub e_ac_plus: f64,
    pub e_atoms: f64,
}

impl From<&EnergyReport> for EnergyRow {
    fn from(r: &EnergyReport) -> Self {
        Self {
            t: r.t,
            e: r.e_total,
            q: r.q,
            drift: r.rel_drift,
            e_ac_minus: r.e_ac_minus,
            e_ac_plus: r.e_ac_plus,
            e_atoms: r.e_atoms,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EventRow {
    pub onset_t: f64,
    pub onset_x: f64,
    pub onset_u: f64,
    pub t_range: (f64, f64),
    pub x_range: (f64, f64),
    pub nodes: usize,
    /// `(∂_u λ₋, ∂_u λ₊)` at the onset.
    pub speed_derivatives: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderRow {
    pub x: f64,
    pub big_x: f64,
    pub samples: usize,
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BalanceRow {
    pub t1: f64,
    pub t2: f64,
    pub x_probe: f64,
    pub slices: usize,
    pub residual: Option<f64>,
    pub relative: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InteractionRow {
    pub value: f64,
    pub bound: f64,
    pub c_hat: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRow {
    pub t: f64,
    pub file: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathRow {
    pub family: String,
    pub y_bar: f64,
    pub file: String,
    pub sup_dx: f64,
    pub compared: usize,
    pub speed_min: f64,
    pub speed_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub t: f64,
    pub file: String,
    pub linf_u: f64,
    pub l2_u: f64,
    pub rel_l2_u: f64,
    pub linf_r: f64,
    pub linf_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub scenario: String,
    pub scenario_hash: String,
    pub h: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub speed_bounds: (f64, f64),
    pub solve: SolveSummary,
    pub energy_series: Vec<EnergyRow>,
    pub events: Vec<EventRow>,
    pub holder: Vec<HolderRow>,
    pub balance: Vec<BalanceRow>,
    pub interaction: InteractionRow,
    pub isochrones: Vec<FileRow>,
    pub paths: Vec<PathRow>,
    pub oracle: Vec<OracleRow>,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub config: RunConfig,
    pub diagnostics: Diagnostics,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.diagnostics.checks.iter().all(|c| c.passed)
    }
}

fn io_err(p: &std::path::Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |e| RunError::io(p, e)
}

/// Sample region used to validate the coefficient bounds and compute `Ĉ`.
fn sample_box<F: CoefficientField + ?Sized>(field: &F, data: &InitialData, t_final: f64) -> SampleBox {
    let reach = field.bounds().n_upper() * t_final + 1.0;
    let (a, b) = data.support;
    let u1 = data.u1.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (lo, hi) = data.u0.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |r, &v| (r.0.min(v), r.1.max(v)));
    let m = 1.0 + t_final * u1;
    SampleBox::new(a - reach, b + reach, lo - m, hi + m)
}

/// The lattice line foot nearest to `y` among lines meeting the curve.
fn nearest_foot(lat: &Lattice, family: Family, y: f64) -> f64 {
    let (lo, hi) = lat.curve_range;
    let feet: Vec<f64> = match family {
        Family::Backward => lat.cols.iter().map(|c| c.foot).collect(),
        Family::Forward => lat.rows.iter().map(|r| r.foot).collect(),
    };
    feet.into_iter()
        .filter(|f| *f >= lo && *f <= hi)
        .min_by(|a, b| (a - y).abs().total_cmp(&(b - y).abs()))
        .unwrap_or(y)
}

/// `(t, x)` samples of one lattice line, gathered while rows stream past.
struct LineSampler {
    family: Family,
    y_bar: f64,
    index: usize,
    line: Vec<(f64, f64)>,
}

impl LineSampler {
    fn new(lat: &Lattice, family: Family, y_bar: f64) -> Self {
        let index = match family {
            Family::Backward => lat.cols.iter().position(|c| c.foot == y_bar),
            Family::Forward => lat.rows.iter().position(|r| r.foot == y_bar),
        }
        .expect("start snapped to a line foot");
        Self { family, y_bar, index, line: vec![(0.0, y_bar)] }
    }

    fn visit(&mut self, j: usize, cur: &GridRow) {
        match self.family {
            Family::Backward => {
                if let Some(n) = cur.get(self.index) {
                    self.line.push((n.t, n.x));
                }
            }
            Family::Forward if j == self.index => self.line.extend(cur.nodes.iter().map(|n| (n.t, n.x))),
            Family::Forward => {}
        }
    }

    fn finish(mut self) -> Vec<(f64, f64)> {
        self.line.dedup_by(|b, a| b.0 == a.0);
        self.line
    }
}

fn sorted_times(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v
}

/// Run the configured pipeline and write its artifacts.
pub fn run(config: &RunConfig) -> Result<RunOutcome, RunError> {
    let cfg = config.effective()?;
    let field = build_field(&cfg.scenario)?;
    let field: &dyn CoefficientField = &*field;
    let data = build_data(&cfg.data)?;
    let (t_final, h) = (cfg.t_final, cfg.h);
    let tol = cfg.tolerances;
    let eps = tol.eps_conc;

    let sbox = sample_box(field, &data, t_final);
    let report = validate_bounds(field, sbox, 4096).map_err(RunError::at("bounds"))?;
    if let Some(v) = report.violations.first() {
        return Err(RunError::Config(format!(
            "declared coefficient bounds violated at x={}, u={} ({:?}, {} violations)",
            v.x,
            v.u,
            v.kind,
            report.violations.len()
        )));
    }

    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let effective_text = cfg.to_toml();
    let cfg_path = dir.join("config.toml");
    fs::write(&cfg_path, &effective_text).map_err(io_err(&cfg_path))?;
    let scenario_hash = io::fnv1a(&format!("{:?}{:?}", cfg.scenario, cfg.data));

    let opts = SolveOptions { tol: tol.cell, max_iter: tol.max_iter, ..SolveOptions::new(h, t_final) };
    let solver = Solver::new(field, &data, opts).map_err(RunError::at("lattice"))?;
    let lat = &solver.lattice;
    let e0 = solver.boundary.e0();
    let mid = 0.5 * (data.support.0 + data.support.1);

    // Every time at which a slice is needed.
    let energy_times: Vec<f64> = (0..=cfg.samples).map(|k| t_final * k as f64 / cfg.samples as f64).collect();
    let iso_times = cfg.isochrone_times.clone().unwrap_or_default();
    let dt = cfg.dt.unwrap_or(h);
    let tr_times = if cfg.checks.trace { trace_times(t_final, dt) } else { Vec::new() };
    let window = cfg.probes.balance_window.unwrap_or([0.25 * t_final, 0.75 * t_final]);
    let bal_times = if cfg.checks.balance { balance_times(window[0], window[1], h) } else { Vec::new() };
    let oracle_times = sorted_times(cfg.probes.oracle_times.clone().unwrap_or_default());
    let cmp_times = if cfg.checks.oracle_compare { oracle_times.clone() } else { Vec::new() };
    let all: Vec<f64> = sorted_times(
        [&energy_times, &iso_times, &tr_times, &bal_times, &cmp_times].into_iter().flatten().copied().collect(),
    );
    let positive: Vec<f64> = all.iter().copied().filter(|&t| t > 0.0).collect();

    // Collectors fed by the single sweep.
    let mut isoc = IsoCollector::new(&positive);
    let mut conc = ConcentrationCollector::new(eps);
    let holder_x = cfg.probes.holder_x.unwrap_or(mid);
    let holder_big_x = solver.boundary.coords(holder_x).map_err(RunError::at("holder"))?.0;
    let mut column = ColumnCollector::nearest(lat, holder_big_x);
    let mut inter = InteractionCollector::new(t_final);
    let xs: Vec<f64> = lat.cols.iter().map(|c| c.coord).collect();
    let ys: Vec<f64> = lat.rows.iter().map(|r| r.coord).collect();
    let starts = cfg.probes.trace_starts.clone().unwrap_or_else(|| vec![mid]);
    let mut lines: Vec<LineSampler> = Vec::new();
    if cfg.checks.trace {
        for &y in &starts {
            for family in [Family::Backward, Family::Forward] {
                lines.push(LineSampler::new(lat, family, nearest_foot(lat, family, y)));
            }
        }
    }
    let det_tol = tol.det.unwrap_or(h * h);
    let mut critical = 0usize;
    let mut dump = if cfg.grid_dump { Some(GridDump::create(&dir, lat, &scenario_hash)?) } else { None };
    let mut dump_err: Option<RunError> = None;

    let visit = |j: usize, prev: Option<&GridRow>, cur: &GridRow| -> conswave_core::Result<()> {
        isoc.visit(lat, j, prev, cur);
        conc.visit(lat, j, cur);
        column.visit(cur);
        inter.visit(field, lat, &ys, &xs, j, cur)?;
        for l in lines.iter_mut() {
            l.visit(j, cur);
        }
        for (i, n) in cur.iter() {
            if n.t <= t_final && !lat.on_curve(i, j) && !lat.is_ghost(i, j) {
                let d = derive(field, n.x, n.u)?;
                if jacobian_det(&n.char_node(), &d).abs() < det_tol {
                    critical += 1;
                }
            }
        }
        if let Some(d) = dump.as_mut() {
            if dump_err.is_none() {
                if let Err(e) = d.row(cur) {
                    dump_err = Some(e);
                }
            }
        }
        Ok(())
    };
    let stats: SolveStats = if cfg.parallel {
        let grid = solve_parallel(&solver).map_err(RunError::at("solve"))?;
        grid.replay(visit).map_err(RunError::at("diagnostics"))?;
        grid.stats
    } else {
        march(&solver, visit).map_err(RunError::at("solve"))?
    };
    if let Some(e) = dump_err {
        return Err(e);
    }
    if let Some(d) = dump {
        d.finish()?;
    }
    if let Some(&t) = positive.last() {
        if t > stats.max_t {
            return Err(RunError::Core { stage: "isochrones", source: conswave_core::Error::EmptyLevelSet { t } });
        }
    }

    let mut isos: Vec<Isochrone> = isoc.finish(lat, eps).map_err(RunError::at("isochrones"))?;
    let curve = curve_isochrone(lat, eps);
    isos.push(curve.clone());
    let slices = Slices::new(isos, Source::Grid);
    let slice = |t: f64| slices.slice(t).map_err(RunError::at("isochrones"));

    io::write_isochrone(&dir.join("curve.csv"), &curve)?;
    let mut iso_rows = Vec::new();
    for (k, &t) in iso_times.iter().enumerate() {
        let file = format!("isochrone_{k:03}.csv");
        io::write_isochrone(&dir.join(&file), slice(t)?)?;
        iso_rows.push(FileRow { t, file });
    }

    let mut checks = Vec::new();
    let mut series = Vec::new();
    for &t in &energy_times {
        series.push(total_energy(slice(t)?, e0));
    }
    io::write_energy(&dir.join("energy.csv"), &series)?;
    let drift = series.iter().fold(0.0f64, |m, r| m.max(r.rel_drift.abs()));
    checks.push(CheckResult::upper(
        "energy_drift",
        drift,
        tol.drift,
        format!("max |E(t) - E0| / E0 over {} samples", series.len()),
    ));
    let q_excess = series.iter().fold(f64::NEG_INFINITY, |m, r| m.max(r.q - e0 * e0));
    checks.push(CheckResult::upper("interaction_potential", q_excess, tol.q_slack, "max Q(t) - E0^2".into()));

    let events: Vec<EventRow> = conc
        .finish()
        .iter()
        .map(|ev| {
            let o = ev.onset();
            EventRow {
                onset_t: o.t,
                onset_x: o.x,
                onset_u: o.u,
                t_range: ev.t_range,
                x_range: ev.x_range,
                nodes: ev.nodes.len(),
                speed_derivatives: ev.speed_derivatives(field).ok(),
            }
        })
        .collect();

    let mut holder = Vec::new();
    if cfg.checks.holder {
        let big_x = lat.cols[column.column].coord;
        let x = lat.cols[column.column].foot;
        let samples: Vec<(f64, f64)> = column.samples.iter().copied().filter(|s| s.0 <= t_final).collect();
        match holder_from_samples(&samples) {
            Ok(theta) => {
                checks.push(CheckResult::lower(
                    "holder",
                    theta,
                    tol.holder_min,
                    format!("backward characteristic from x={x}"),
                ));
                holder.push(HolderRow { x, big_x, samples: samples.len(), exponent: Some(theta) });
            }
            Err(e) => {
                checks.push(CheckResult::failed("holder", tol.holder_min, e.to_string()));
                holder.push(HolderRow { x, big_x, samples: samples.len(), exponent: None });
            }
        }
    }

    let mut balance = Vec::new();
    if cfg.checks.balance {
        let x_probe = cfg.probes.balance_x.unwrap_or(mid);
        let bal: Result<Vec<Isochrone>, RunError> = bal_times.iter().map(|&t| slice(t).cloned()).collect();
        let res = bal.and_then(|b| balance_residual_from(&b, field, x_probe).map_err(RunError::at("balance")));
        let scale = if e0 > 0.0 { e0 } else { 1.0 };
        let mut row = BalanceRow {
            t1: window[0],
            t2: window[1],
            x_probe,
            slices: bal_times.len(),
            residual: None,
            relative: None,
        };
        match res {
            Ok(r) => {
                row.residual = Some(r);
                row.relative = Some(r.abs() / scale);
                checks.push(CheckResult::upper("balance", r.abs() / scale, tol.balance, format!("probe x={x_probe}")));
            }
            Err(e) => checks.push(CheckResult::failed("balance", tol.balance, e.to_string())),
        }
        balance.push(row);
    }

    let mut paths = Vec::new();
    if cfg.checks.trace {
        let mut worst: f64 = 0.0;
        let mut failure = None;
        let mut counts = [0usize; 2];
        for l in lines {
            let (family, y_bar) = (l.family, l.y_bar);
            let (name, k) = match family {
                Family::Backward => ("backward", 0),
                Family::Forward => ("forward", 1),
            };
            match trace_characteristic(&slices, field, family, y_bar, t_final, dt) {
                Ok(p) => {
                    let line = l.finish();
                    let rep = compare_with_samples(&line, &p);
                    let file = format!("path_{name}_{:03}.csv", counts[k]);
                    counts[k] += 1;
                    io::write_path(&dir.join(&file), &p)?;
                    let (smin, smax) = p.speed_range();
                    worst = worst.max(rep.sup_dx);
                    paths.push(PathRow {
                        family: name.into(),
                        y_bar,
                        file,
                        sup_dx: rep.sup_dx,
                        compared: rep.compared,
                        speed_min: smin,
                        speed_max: smax,
                    });
                }
                Err(e) => {
                    failure.get_or_insert(format!("{name} from {y_bar}: {e}"));
                }
            }
        }
        checks.push(match failure {
            None => CheckResult::upper(
                "trace",
                worst,
                tol.trace,
                "sup |x_path - x_line| over traced characteristics".into(),
            ),
            Some(msg) => CheckResult::failed("trace", tol.trace, msg),
        });
    }

    let mut oracle = Vec::new();
    if cfg.checks.oracle_compare {
        let fd = FdOptions { cfl: tol.fd_cfl, blowup_cap: tol.fd_blowup_cap, energy_loss: tol.fd_energy_loss };
        let dx = cfg.dx.unwrap_or(h);
        let outcome = fdoracle::run(field, &data, &cmp_times, dx, fd).and_then(|states| {
            let ref_isos: Vec<Isochrone> =
                cmp_times.iter().map(|&t| slices.slice(t).cloned()).collect::<Result<_, _>>()?;
            let rows = fdoracle::compare(&states, &ref_isos)?;
            Ok((states, rows))
        });
        match outcome {
            Ok((states, rows)) => {
                let mut worst: f64 = 0.0;
                for (k, (s, r)) in states.iter().zip(&rows).enumerate() {
                    let file = format!("fd_{k:03}.csv");
                    io::write_snapshot(&dir.join(&file), s)?;
                    worst = worst.max(r.rel_l2_u);
                    oracle.push(OracleRow {
                        t: r.t,
                        file,
                        linf_u: r.linf_u,
                        l2_u: r.l2_u,
                        rel_l2_u: r.rel_l2_u,
                        linf_r: r.linf_r,
                        linf_s: r.linf_s,
                    });
                }
                checks.push(CheckResult::upper(
                    "oracle_compare",
                    worst,
                    tol.oracle,
                    format!("relative L2 difference in u, dx={dx}"),
                ));
            }
            Err(e) => checks.push(CheckResult::failed("oracle_compare", tol.oracle, e.to_string())),
        }
    }

    let b = field.bounds();
    let c_hat = source_bound_constant(field, sbox, 4096).map_err(RunError::at("bounds"))?;
    let interaction = InteractionRow {
        value: inter.total,
        bound: interaction_bound(b.alpha2, b.gamma1, b.m_lower(), c_hat, e0, t_final),
        c_hat,
    };

    let diagnostics = Diagnostics {
        scenario: cfg.scenario.preset.clone(),
        scenario_hash,
        h,
        t_final,
        e0,
        speed_bounds: (b.n_lower(), b.n_upper()),
        solve: SolveSummary {
            nodes: stats.nodes,
            nx: lat.nx(),
            ny: lat.ny(),
            orientation: lat.orientation,
            max_residual: stats.max_residual,
            max_iterations: stats.max_iterations,
            min_sigma: stats.min_sigma,
            min_eta: stats.min_eta,
            max_t: stats.max_t,
            critical_nodes: critical,
        },
        energy_series: series.iter().map(EnergyRow::from).collect(),
        events,
        holder,
        balance,
        interaction,
        isochrones: iso_rows,
        paths,
        oracle,
        checks,
    };
    io::write_json(&dir.join("diagnostics.json"), &diagnostics)?;
    let summary = summary_text(&cfg, &diagnostics);
    let sp = dir.join("summary.txt");
    fs::write(&sp, summary).map_err(io_err(&sp))?;
    Ok(RunOutcome { dir, config: cfg, diagnostics })
}

/// Human-readable report of a run.
pub fn summary_text(cfg: &RunConfig, d: &Diagnostics) -> String {
    let mut s = String::new();
    let mut line = |t: String| {
        s.push_str(&t);
        s.push('\n');
    };
    line(format!("scenario        {} ({})", d.scenario, d.scenario_hash));
    line(format!(
        "data            {}",
        cfg.data.file.as_ref().map_or(cfg.data.preset.clone(), |p| p.display().to_string())
    ));
    line(format!("T, h            {}, {}", d.t_final, d.h));
    line(format!(
        "lattice         {} x {} lines, {} nodes, orientation {}",
        d.solve.nx, d.solve.ny, d.solve.nodes, d.solve.orientation
    ));
    line(format!("cell solver     max residual {:e}, max iterations {}", d.solve.max_residual, d.solve.max_iterations));
    line(format!("E0              {}", d.e0));
    if let Some(last) = d.energy_series.last() {
        line(format!("E(T)            {} (atoms {})", last.e, last.e_atoms));
    }
    line(format!("concentration   {} event(s)", d.events.len()));
    for e in d.events.iter().take(8) {
        line(format!(
            "  onset t={:.6} x={:.6}, t in [{:.6}, {:.6}], {} nodes",
            e.onset_t, e.onset_x, e.t_range.0, e.t_range.1, e.nodes
        ));
    }
    if d.events.len() > 8 {
        line(format!("  ... {} more in diagnostics.json", d.events.len() - 8));
    }
    line(format!("critical nodes  {}", d.solve.critical_nodes));
    line(format!("interaction     {} (bound {})", d.interaction.value, d.interaction.bound));
    line("checks".into());
    for c in &d.checks {
        let v = c.value.map_or("-".to_string(), |v| format!("{v:e}"));
        line(format!(
            "  {:<22} {}  value {}  tolerance {:e}  {}",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            v,
            c.tolerance,
            c.detail
        ));
    }
    s
}
