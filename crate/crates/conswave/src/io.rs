//! CSV and JSON artifact writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use conswave_core::chartrace::CharPath;
use conswave_core::diagnostics::EnergyReport;
use conswave_core::fdoracle::FdState;
use conswave_core::goursat::{GridNode, GridRow, Lattice};
use conswave_core::physmap::Isochrone;
use serde::Serialize;

use crate::RunError;

pub const ISOCHRONE_HEADER: [&str; 9] =
    ["x", "u", "sigma", "eta", "Rt2", "St2", "mu_minus_cum", "mu_plus_cum", "concentrated"];

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, RunError> {
    csv::Writer::from_path(path).map_err(|e| RunError::io(path, e))
}

fn rows<const N: usize>(
    path: &Path,
    header: [&str; N],
    data: impl Iterator<Item = [String; N]>,
) -> Result<(), RunError> {
    let mut w = csv_writer(path)?;
    let err = |e| RunError::io(path, e);
    w.write_record(header).map_err(err)?;
    for r in data {
        w.write_record(&r).map_err(err)?;
    }
    w.flush().map_err(|e| RunError::io(path, e))
}

fn f(v: f64) -> String {
    format!("{v}")
}

pub fn write_isochrone(path: &Path, iso: &Isochrone) -> Result<(), RunError> {
    rows(
        path,
        ISOCHRONE_HEADER,
        iso.points.iter().map(|p| {
            [
                f(p.x),
                f(p.u),
                f(p.sigma),
                f(p.eta),
                f(p.rt2),
                f(p.st2),
                f(p.mu_minus_cum),
                f(p.mu_plus_cum),
                u8::from(p.concentrated).to_string(),
            ]
        }),
    )
}

pub fn write_path(path: &Path, p: &CharPath) -> Result<(), RunError> {
    rows(path, ["t", "coord", "x"], p.samples.iter().map(|s| [f(s.t), f(s.coord), f(s.x)]))
}

pub fn write_snapshot(path: &Path, s: &FdState) -> Result<(), RunError> {
    rows(path, ["x", "u", "R", "S"], (0..s.len()).map(|i| [f(s.x(i)), f(s.u[i]), f(s.r[i]), f(s.s[i])]))
}

pub fn write_energy(path: &Path, series: &[EnergyReport]) -> Result<(), RunError> {
    rows(path, ["t", "E", "Q", "drift"], series.iter().map(|r| [f(r.t), f(r.e_total), f(r.q), f(r.rel_drift)]))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| RunError::io(path, e))
}

pub const GRID_FIELDS: [&str; 9] = ["t", "x", "u", "p", "q", "sigma", "eta", "xi", "zeta"];

fn field_values(n: &GridNode) -> [f64; 9] {
    [n.t, n.x, n.u, n.psx_e[0], n.qez_n[0], n.psx_e[1], n.qez_n[1], n.psx_e[2], n.qez_n[2]]
}

#[derive(Serialize)]
struct GridSidecar<'a> {
    h: f64,
    #[serde(rename = "X0")]
    x0: f64,
    #[serde(rename = "Y0")]
    y0: f64,
    #[serde(rename = "nX")]
    nx: usize,
    #[serde(rename = "nY")]
    ny: usize,
    orientation: i8,
    scenario_hash: String,
    fields: &'a [&'a str],
    /// Line coordinates; the spacing is uniform between breakpoint-anchored lines.
    #[serde(rename = "X")]
    xs: Vec<f64>,
    #[serde(rename = "Y")]
    ys: Vec<f64>,
}

/// One CSV matrix per field, a line per lattice row (`Ŷ` increasing) and a
/// column per `X`; nodes outside the computed region are left empty.
pub struct GridDump {
    files: Vec<(std::path::PathBuf, BufWriter<File>)>,
    nx: usize,
}

impl GridDump {
    pub fn create(dir: &Path, lat: &Lattice, scenario_hash: &str) -> Result<Self, RunError> {
        let side = GridSidecar {
            h: lat.h,
            x0: lat.cols[0].coord,
            y0: lat.rows[0].coord,
            nx: lat.nx(),
            ny: lat.ny(),
            orientation: lat.orientation,
            scenario_hash: scenario_hash.to_string(),
            fields: &GRID_FIELDS,
            xs: lat.cols.iter().map(|c| c.coord).collect(),
            ys: lat.rows.iter().map(|r| r.coord).collect(),
        };
        write_json(&dir.join("grid.json"), &side)?;
        let mut files = Vec::new();
        for name in GRID_FIELDS {
            let p = dir.join(format!("grid_{name}.csv"));
            let w = BufWriter::new(File::create(&p).map_err(|e| RunError::io(&p, e))?);
            files.push((p, w));
        }
        Ok(Self { files, nx: lat.nx() })
    }

    pub fn row(&mut self, row: &GridRow) -> Result<(), RunError> {
        let mut lines = vec![String::new(); GRID_FIELDS.len()];
        for i in 0..self.nx {
            let vals = row.get(i).map(field_values);
            for (k, line) in lines.iter_mut().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                if let Some(v) = vals {
                    line.push_str(&f(v[k]));
                }
            }
        }
        for ((p, w), line) in self.files.iter_mut().zip(lines) {
            writeln!(w, "{line}").map_err(|e| RunError::io(p, e))?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<(), RunError> {
        for (p, mut w) in self.files {
            w.flush().map_err(|e| RunError::io(&p, e))?;
        }
        Ok(())
    }
}

/// FNV-1a, used to tag artifacts with the scenario that produced them.
pub fn fnv1a(text: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}
