//! Characteristics traced in the energy variables.
//!
//! A backward characteristic from `ȳ` is followed through
//! `ω = x + μ₋((−∞, x))`, which obeys `ω̇ = c₁/α + ∫_{−∞}^{x} G`; the forward
//! one through `υ = x + μ₊((−∞, x))` with `υ̇ = c₂/α − ∫_{−∞}^{x} G`. At each
//! time `x` is recovered by inverting the coordinate on the provider's slice.

use alloc::vec::Vec;

use crate::coeffs::{derive, CoefficientField};
use crate::diagnostics::source_integral;
use crate::goursat::{CharGrid, Lattice};
use crate::math::{fabs, lerp};
use crate::physmap::Isochrone;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Backward,
    Forward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Grid,
    Oracle,
}

/// Time slices of a solution, each as an isochrone.
pub trait SliceProvider {
    fn slice(&self, t: f64) -> Result<&Isochrone>;
    fn source(&self) -> Source;
}

/// Slices at precomputed times, looked up exactly (to `1e-12`).
pub struct Slices {
    pub isos: Vec<Isochrone>,
    pub kind: Source,
}

impl Slices {
    pub fn new(mut isos: Vec<Isochrone>, kind: Source) -> Self {
        isos.sort_by(|a, b| a.t_star.total_cmp(&b.t_star));
        Self { isos, kind }
    }
}

impl SliceProvider for Slices {
    fn slice(&self, t: f64) -> Result<&Isochrone> {
        let k = self.isos.partition_point(|s| s.t_star < t - 1e-12);
        match self.isos.get(k) {
            Some(s) if fabs(s.t_star - t) <= 1e-12 => Ok(s),
            _ => Err(Error::ProviderGap { t }),
        }
    }

    fn source(&self) -> Source {
        self.kind
    }
}

/// The times `0, dt, …, T` a trace visits.
pub fn trace_times(t_final: f64, dt: f64) -> Vec<f64> {
    let n = libm::round(t_final / dt).max(1.0) as usize;
    (0..=n).map(|k| if k == n { t_final } else { t_final * k as f64 / n as f64 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub t: f64,
    /// `ω` or `υ`.
    pub coord: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharPath {
    pub family: Family,
    pub y_bar: f64,
    pub samples: Vec<PathSample>,
    pub source: Source,
}

impl CharPath {
    /// `(min, max)` of `|Δx/Δt|` over steps.
    pub fn speed_range(&self) -> (f64, f64) {
        let mut r = (f64::INFINITY, 0.0f64);
        for w in self.samples.windows(2) {
            let v = fabs((w[1].x - w[0].x) / (w[1].t - w[0].t));
            r = (r.0.min(v), r.1.max(v));
        }
        r
    }
}

fn invert(iso: &Isochrone, family: Family, w: f64) -> Result<f64> {
    match family {
        Family::Backward => iso.x_of_omega(w),
        Family::Forward => iso.x_of_upsilon(w),
    }
}

fn rate<F: CoefficientField + ?Sized>(iso: &Isochrone, field: &F, family: Family, x: f64) -> Result<f64> {
    let u = iso.sample_u(x)?;
    let d = derive(field, x, u)?;
    let g = source_integral(iso, field, x)?;
    Ok(match family {
        Family::Backward => d.c1 / d.alpha + g,
        Family::Forward => d.c2 / d.alpha - g,
    })
}

/// Heun integration of the energy-variable equation from `(0, ȳ)` to `T`.
pub fn trace_characteristic<P: SliceProvider + ?Sized, F: CoefficientField + ?Sized>(
    provider: &P,
    field: &F,
    family: Family,
    y_bar: f64,
    t_final: f64,
    dt: f64,
) -> Result<CharPath> {
    if !(dt > 0.0) {
        return Err(Error::InvalidData("dt must be positive"));
    }
    let times = trace_times(t_final, dt);
    let s0 = provider.slice(0.0)?;
    let (mm, mp) = s0.cumulative_at(y_bar)?;
    let mut w = y_bar + if family == Family::Backward { mm } else { mp };
    let mut x = y_bar;
    let mut samples = Vec::with_capacity(times.len());
    samples.push(PathSample { t: 0.0, coord: w, x });
    for k in 1..times.len() {
        let (a, b) = (provider.slice(times[k - 1])?, provider.slice(times[k])?);
        let h = times[k] - times[k - 1];
        let fa = rate(a, field, family, x)?;
        let pred = w + h * fa;
        let xp = invert(b, family, pred)?;
        let fb = rate(b, field, family, xp)?;
        w += 0.5 * h * (fa + fb);
        x = invert(b, family, w)?;
        samples.push(PathSample { t: times[k], coord: w, x });
    }
    Ok(CharPath { family, y_bar, samples, source: provider.source() })
}

/// `(t, x)` along the lattice line issuing from `ȳ`, starting at the curve.
pub fn gridline(grid: &CharGrid, family: Family, y_bar: f64) -> Result<Vec<(f64, f64)>> {
    let lat = &grid.lattice;
    let tol = 1e-12 * (1.0 + fabs(y_bar));
    let mut out = Vec::new();
    match family {
        Family::Backward => {
            let i = find_line(lat.cols.iter().map(|c| c.foot), y_bar, tol)?;
            out.push((0.0, lat.cols[i].foot));
            for row in &grid.rows {
                if let Some(n) = row.get(i) {
                    out.push((n.t, n.x));
                }
            }
        }
        Family::Forward => {
            let j = find_line(lat.rows.iter().map(|r| r.foot), y_bar, tol)?;
            out.push((0.0, lat.rows[j].foot));
            out.extend(grid.rows[j].iter().map(|(_, n)| (n.t, n.x)));
        }
    }
    out.dedup_by(|b, a| b.0 == a.0);
    Ok(out)
}

fn find_line(feet: impl Iterator<Item = f64>, y_bar: f64, tol: f64) -> Result<usize> {
    feet.enumerate().filter(|(_, f)| fabs(f - y_bar) <= tol).map(|(k, _)| k).next().ok_or(Error::MismatchedStart)
}

/// Feet of lattice lines strictly inside `(lo, hi)`, for choosing starts.
pub fn line_feet(lat: &Lattice, family: Family, lo: f64, hi: f64) -> Vec<f64> {
    let it: Vec<f64> = match family {
        Family::Backward => lat.cols.iter().map(|c| c.foot).collect(),
        Family::Forward => lat.rows.iter().map(|r| r.foot).collect(),
    };
    it.into_iter().filter(|&f| f > lo && f < hi).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridlineReport {
    /// `sup |x_path(t) − x_line(t)|` over compared times.
    pub sup_dx: f64,
    pub compared: usize,
}

/// Compare a traced path against a line given as `(t, x)` samples with `t`
/// nondecreasing; times outside the line's range are skipped.
pub fn compare_with_samples(line: &[(f64, f64)], path: &CharPath) -> GridlineReport {
    let mut sup: f64 = 0.0;
    let mut compared = 0;
    let t_max = line.last().map_or(0.0, |l| l.0);
    for s in &path.samples {
        if s.t > t_max {
            continue;
        }
        let k = line.partition_point(|l| l.0 < s.t);
        let x = if k == 0 {
            line[0].1
        } else {
            let (a, b) = (line[k - 1], line[k]);
            lerp(a.1, b.1, (s.t - a.0) / (b.0 - a.0))
        };
        sup = sup.max(fabs(x - s.x));
        compared += 1;
    }
    GridlineReport { sup_dx: sup, compared }
}

pub fn compare_with_gridline(grid: &CharGrid, path: &CharPath) -> Result<GridlineReport> {
    let line = gridline(grid, path.family, path.y_bar)?;
    Ok(compare_with_samples(&line, path))
}
