//! Run configuration, read from TOML (or JSON) and written back with every
//! default filled in.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// `linear`, `liquid-crystal`, `x-heterogeneous` or `custom`.
    pub preset: String,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub gamma0: Option<f64>,
    pub amplitude: Option<f64>,
    pub wavenumber: Option<f64>,
    /// JSON table for `custom`.
    pub table: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            preset: "linear".into(),
            alpha: None,
            beta: None,
            gamma: None,
            k1: None,
            k2: None,
            gamma0: None,
            amplitude: None,
            wavenumber: None,
            table: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    /// `pulse`, `hat`, `hat-steep`, `gauss-like` or `zero`; ignored when `file` is set.
    pub preset: String,
    /// JSON file with `u0_breakpoints`, `u0_values`, `u1_breakpoints`, `u1_values`, `support`.
    pub file: Option<PathBuf>,
    pub base: Option<f64>,
    pub height: Option<f64>,
    pub amplitude: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub pieces: Option<usize>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            preset: "pulse".into(),
            file: None,
            base: None,
            height: None,
            amplitude: None,
            a: None,
            b: None,
            pieces: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Checks {
    pub oracle_compare: bool,
    pub trace: bool,
    pub holder: bool,
    pub balance: bool,
}

impl Default for Checks {
    fn default() -> Self {
        Self { oracle_compare: false, trace: true, holder: true, balance: true }
    }
}

impl Checks {
    pub fn set(&mut self, name: &str, on: bool) -> Result<(), RunError> {
        match name {
            "oracle_compare" | "oracle-compare" | "oracle" => self.oracle_compare = on,
            "trace" => self.trace = on,
            "holder" => self.holder = on,
            "balance" => self.balance = on,
            _ => return Err(RunError::Config(format!("unknown check `{name}`"))),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Cell solver fixed-point tolerance.
    pub cell: f64,
    pub max_iter: usize,
    /// `σ` or `η` below this marks a concentrated point.
    pub eps_conc: f64,
    /// `|det| <` this flags a critical node; `None` means `h²`.
    pub det: Option<f64>,
    /// Relative energy drift.
    pub drift: f64,
    /// Slack in `Q ≤ E₀²`.
    pub q_slack: f64,
    /// Sup distance between traced paths and lattice lines.
    pub trace: f64,
    pub holder_min: f64,
    /// Balance residual relative to `E₀`.
    pub balance: f64,
    /// Relative `L²` difference against the difference scheme.
    pub oracle: f64,
    pub fd_cfl: f64,
    pub fd_blowup_cap: f64,
    pub fd_energy_loss: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cell: 1e-12,
            max_iter: 60,
            eps_conc: 1e-6,
            det: None,
            drift: 1e-3,
            q_slack: 1e-10,
            trace: 1e-2,
            holder_min: 0.4,
            balance: 1e-2,
            oracle: 1e-2,
            fd_cfl: 0.4,
            fd_blowup_cap: 1e6,
            fd_energy_loss: 1e-2,
        }
    }
}

/// Where the diagnostics look.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Probes {
    /// Physical starting points of traced characteristics; each is moved to the
    /// nearest lattice line foot.
    pub trace_starts: Option<Vec<f64>>,
    /// `x` whose backward characteristic is used for the Hölder estimate.
    pub holder_x: Option<f64>,
    pub balance_x: Option<f64>,
    pub balance_window: Option<[f64; 2]>,
    pub oracle_times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(rename = "T")]
    pub t_final: f64,
    pub h: f64,
    /// Difference-scheme spacing; `None` means `h`.
    pub dx: Option<f64>,
    /// Trace step; `None` means `h`.
    pub dt: Option<f64>,
    pub output_dir: PathBuf,
    /// Reserved; nothing in the pipeline is random.
    pub seed: u64,
    pub parallel: bool,
    pub grid_dump: bool,
    /// Number of energy samples after `t = 0`.
    pub samples: usize,
    pub isochrone_times: Option<Vec<f64>>,
    pub scenario: ScenarioConfig,
    pub data: DataConfig,
    pub checks: Checks,
    pub tolerances: Tolerances,
    pub probes: Probes,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            t_final: 1.0,
            h: 1.0 / 64.0,
            dx: None,
            dt: None,
            output_dir: PathBuf::from("run"),
            seed: 0,
            parallel: false,
            grid_dump: true,
            samples: 16,
            isochrone_times: None,
            scenario: ScenarioConfig::default(),
            data: DataConfig::default(),
            checks: Checks::default(),
            tolerances: Tolerances::default(),
            probes: Probes::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), RunError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(RunError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

fn or(v: &mut Option<f64>, d: f64) {
    v.get_or_insert(d);
}

impl RunConfig {
    /// Parse TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self, RunError> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| RunError::Config(format!("JSON config: {e}")))
        } else {
            toml::from_str(text).map_err(|e| RunError::Config(format!("TOML config: {e}")))
        }
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    /// Check the invariants and fill every optional value with its default.
    pub fn effective(&self) -> Result<Self, RunError> {
        let mut c = self.clone();
        positive("T", c.t_final)?;
        positive("h", c.h)?;
        let h = c.h;
        positive("dx", *c.dx.get_or_insert(h))?;
        positive("dt", *c.dt.get_or_insert(h))?;
        if c.samples == 0 {
            return Err(RunError::Config("samples must be at least 1".into()));
        }
        for v in [c.tolerances.cell, c.tolerances.eps_conc, c.tolerances.fd_cfl] {
            positive("tolerance", v)?;
        }
        positive("det tolerance", *c.tolerances.det.get_or_insert(h * h))?;

        let s = &mut c.scenario;
        match s.preset.as_str() {
            "linear" => {
                or(&mut s.alpha, 1.0);
                or(&mut s.beta, 0.0);
                or(&mut s.gamma, 1.0);
            }
            "liquid-crystal" => {
                or(&mut s.k1, 1.0);
                or(&mut s.k2, 4.0);
            }
            "x-heterogeneous" => {
                or(&mut s.gamma0, 1.0);
                or(&mut s.amplitude, 0.3);
                or(&mut s.wavenumber, 1.0);
            }
            "custom" => {
                if s.table.is_none() {
                    return Err(RunError::Config("custom scenario needs `table`".into()));
                }
            }
            p => return Err(RunError::Config(format!("unknown scenario preset `{p}`"))),
        }

        let d = &mut c.data;
        if d.file.is_none() {
            match d.preset.as_str() {
                "pulse" => {
                    or(&mut d.amplitude, 1.0);
                    or(&mut d.a, 0.0);
                    or(&mut d.b, 1.0);
                }
                "hat" => {
                    or(&mut d.base, 0.0);
                    or(&mut d.height, 0.5);
                    or(&mut d.a, -0.5);
                    or(&mut d.b, 0.5);
                }
                "hat-steep" => {
                    or(&mut d.base, 0.0);
                    or(&mut d.height, 1.0);
                    or(&mut d.a, -0.2);
                    or(&mut d.b, 0.2);
                }
                "gauss-like" => {
                    or(&mut d.base, 0.0);
                    or(&mut d.amplitude, 1.0);
                    or(&mut d.a, -0.5);
                    or(&mut d.b, 0.5);
                    d.pieces.get_or_insert(64);
                }
                "zero" => {
                    or(&mut d.base, 0.0);
                    or(&mut d.a, 0.0);
                    or(&mut d.b, 1.0);
                }
                p => return Err(RunError::Config(format!("unknown data preset `{p}`"))),
            }
        }

        let t = c.t_final;
        let times = c.isochrone_times.get_or_insert_with(|| (0..=4).map(|k| t * k as f64 / 4.0).collect());
        if times.iter().any(|&s| !(0.0..=t).contains(&s)) {
            return Err(RunError::Config("isochrone times must lie in [0, T]".into()));
        }
        let w = *c.probes.balance_window.get_or_insert([0.25 * t, 0.75 * t]);
        if !(0.0 <= w[0] && w[0] < w[1] && w[1] <= t) {
            return Err(RunError::Config("balance window must satisfy 0 ≤ t1 < t2 ≤ T".into()));
        }
        let ot = c.probes.oracle_times.get_or_insert_with(|| vec![0.5 * t]);
        if ot.iter().any(|&s| !(s > 0.0 && s <= t)) {
            return Err(RunError::Config("oracle times must lie in (0, T]".into()));
        }
        Ok(c)
    }
}
