//! Flat tables for external plotting, re-projected from a finished run.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::Value;

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Energy,
    Isochrone,
    Paths,
}

impl FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "energy" => Ok(PlotKind::Energy),
            "isochrone" | "isochrones" => Ok(PlotKind::Isochrone),
            "paths" => Ok(PlotKind::Paths),
            _ => Err(format!("unknown plot kind `{s}` (energy, isochrone, paths)")),
        }
    }
}

fn missing(dir: &Path, what: impl Into<String>) -> RunError {
    RunError::MissingArtifacts { dir: dir.to_path_buf(), what: what.into() }
}

fn list<'a>(diag: &'a Value, key: &str, dir: &Path) -> Result<&'a Vec<Value>, RunError> {
    diag.get(key).and_then(Value::as_array).ok_or_else(|| missing(dir, format!("`{key}` in diagnostics.json")))
}

fn field<'a>(v: &'a Value, key: &str, dir: &Path) -> Result<&'a Value, RunError> {
    v.get(key).ok_or_else(|| missing(dir, format!("`{key}` in diagnostics.json")))
}

/// Append the rows of a CSV artifact to `out`, prefixed by `prefix`.
fn append(out: &mut csv::Writer<std::fs::File>, dir: &Path, file: &str, prefix: &[String]) -> Result<(), RunError> {
    let path = dir.join(file);
    if !path.is_file() {
        return Err(missing(dir, file.to_string()));
    }
    let mut r = csv::Reader::from_path(&path).map_err(|e| RunError::io(&path, e))?;
    for rec in r.records() {
        let rec = rec.map_err(|e| RunError::io(&path, e))?;
        let row: Vec<&str> = prefix.iter().map(String::as_str).chain(rec.iter()).collect();
        out.write_record(&row).map_err(|e| RunError::io(&path, e))?;
    }
    Ok(())
}

fn header(path: &Path, dir: &Path, file: &str) -> Result<Vec<String>, RunError> {
    let src = dir.join(file);
    let mut r = csv::Reader::from_path(&src).map_err(|_| missing(dir, file.to_string()))?;
    let h = r.headers().map_err(|e| RunError::io(path, e))?;
    Ok(h.iter().map(str::to_string).collect())
}

fn num(v: &Value) -> String {
    match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Write `plot_<kind>.csv` into `run_dir` and return its path.
pub fn emit_plotdata(run_dir: &Path, kind: PlotKind) -> Result<PathBuf, RunError> {
    let dpath = run_dir.join("diagnostics.json");
    let text = std::fs::read_to_string(&dpath).map_err(|_| missing(run_dir, "diagnostics.json"))?;
    let diag: Value = serde_json::from_str(&text).map_err(|e| RunError::io(&dpath, e))?;
    let name = match kind {
        PlotKind::Energy => "plot_energy.csv",
        PlotKind::Isochrone => "plot_isochrone.csv",
        PlotKind::Paths => "plot_paths.csv",
    };
    let out_path = run_dir.join(name);
    let mut out = csv::Writer::from_path(&out_path).map_err(|e| RunError::io(&out_path, e))?;
    let werr = |e: csv::Error| RunError::io(&out_path, e);
    match kind {
        PlotKind::Energy => {
            out.write_record(["t", "E", "Q", "drift"]).map_err(werr)?;
            for r in list(&diag, "energy_series", run_dir)? {
                let row: Vec<String> =
                    ["t", "E", "Q", "drift"].iter().map(|k| field(r, k, run_dir).map(num)).collect::<Result<_, _>>()?;
                out.write_record(&row).map_err(werr)?;
            }
        }
        PlotKind::Isochrone => {
            let items = list(&diag, "isochrones", run_dir)?;
            let mut wrote_header = false;
            for it in items {
                let file = field(it, "file", run_dir)?.as_str().unwrap_or_default().to_string();
                if !wrote_header {
                    let mut h = vec!["t".to_string()];
                    h.extend(header(&out_path, run_dir, &file)?);
                    out.write_record(&h).map_err(werr)?;
                    wrote_header = true;
                }
                append(&mut out, run_dir, &file, &[num(field(it, "t", run_dir)?)])?;
            }
            if !wrote_header {
                return Err(missing(run_dir, "isochrone exports"));
            }
        }
        PlotKind::Paths => {
            out.write_record(["family", "y_bar", "t", "coord", "x"]).map_err(werr)?;
            for p in list(&diag, "paths", run_dir)? {
                let file = field(p, "file", run_dir)?.as_str().unwrap_or_default().to_string();
                let prefix = [num(field(p, "family", run_dir)?), num(field(p, "y_bar", run_dir)?)];
                append(&mut out, run_dir, &file, &prefix)?;
            }
        }
    }
    out.flush().map_err(|e| RunError::io(&out_path, e))?;
    Ok(out_path)
}
