//! Scenario and initial-data presets, and the JSON file formats behind
//! `custom` scenarios and data files.

use std::path::Path;

use conswave_core::coeffs::{CoeffBounds, CoefficientField, Constant, LiquidCrystal, Tabulated, XHeterogeneous};
use conswave_core::initdata::InitialData;
use serde::Deserialize;

use crate::config::{DataConfig, ScenarioConfig};
use crate::RunError;

pub type Field = Box<dyn CoefficientField + Send>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsFile {
    alpha1: f64,
    alpha2: f64,
    beta2: f64,
    gamma1: f64,
    gamma2: f64,
    grad_sup: f64,
}

/// Tabulated coefficients on a tensor grid, row-major `[ix * us.len() + iu]`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    xs: Vec<f64>,
    us: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    bounds: BoundsFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DataFile {
    u0_breakpoints: Vec<f64>,
    u0_values: Vec<f64>,
    #[serde(default)]
    u1_breakpoints: Vec<f64>,
    #[serde(default)]
    u1_values: Vec<f64>,
    support: [f64; 2],
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, RunError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
}

fn need(v: Option<f64>, name: &str) -> Result<f64, RunError> {
    v.ok_or_else(|| RunError::Config(format!("missing parameter `{name}`")))
}

/// Build the coefficient field of an effective scenario.
pub fn build_field(s: &ScenarioConfig) -> Result<Field, RunError> {
    Ok(match s.preset.as_str() {
        "linear" => Box::new(Constant::new(need(s.alpha, "alpha")?, need(s.beta, "beta")?, need(s.gamma, "gamma")?)),
        "liquid-crystal" => {
            let (k1, k2) = (need(s.k1, "k1")?, need(s.k2, "k2")?);
            if !(k1 > 0.0 && k2 > 0.0) {
                return Err(RunError::Config("k1 and k2 must be positive".into()));
            }
            Box::new(LiquidCrystal::new(k1, k2))
        }
        "x-heterogeneous" => {
            let f = XHeterogeneous {
                gamma0: need(s.gamma0, "gamma0")?,
                amplitude: need(s.amplitude, "amplitude")?,
                wavenumber: need(s.wavenumber, "wavenumber")?,
            };
            if !(f.gamma0 > 0.0 && f.amplitude.abs() < 1.0) {
                return Err(RunError::Config("x-heterogeneous needs gamma0 > 0 and |amplitude| < 1".into()));
            }
            Box::new(f)
        }
        "custom" => {
            let path = s.table.as_ref().ok_or_else(|| RunError::Config("custom scenario needs `table`".into()))?;
            let t: TableFile = read_json(path)?;
            let b = t.bounds;
            let declared = CoeffBounds {
                alpha1: b.alpha1,
                alpha2: b.alpha2,
                beta2: b.beta2,
                gamma1: b.gamma1,
                gamma2: b.gamma2,
                grad_sup: b.grad_sup,
            };
            Box::new(Tabulated::new(t.xs, t.us, t.alpha, t.beta, t.gamma, declared)?)
        }
        p => return Err(RunError::Config(format!("unknown scenario preset `{p}`"))),
    })
}

/// Build the initial data of an effective data section.
pub fn build_data(d: &DataConfig) -> Result<InitialData, RunError> {
    if let Some(path) = &d.file {
        let f: DataFile = read_json(path)?;
        return Ok(InitialData::from_arrays(
            f.u0_breakpoints,
            f.u0_values,
            f.u1_breakpoints,
            f.u1_values,
            (f.support[0], f.support[1]),
        )?);
    }
    let (a, b) = (need(d.a, "a")?, need(d.b, "b")?);
    Ok(match d.preset.as_str() {
        "pulse" => InitialData::pulse(need(d.amplitude, "amplitude")?, a, b)?,
        "hat" | "hat-steep" => InitialData::hat(need(d.base, "base")?, need(d.height, "height")?, a, b)?,
        "gauss-like" => {
            let pieces = d.pieces.ok_or_else(|| RunError::Config("missing parameter `pieces`".into()))?;
            InitialData::gauss_like(need(d.base, "base")?, need(d.amplitude, "amplitude")?, a, b, pieces)?
        }
        "zero" => {
            if !(a < b) {
                return Err(RunError::Config("zero data needs a < b".into()));
            }
            InitialData::zero(need(d.base, "base")?, (a, b))
        }
        p => return Err(RunError::Config(format!("unknown data preset `{p}`"))),
    })
}
