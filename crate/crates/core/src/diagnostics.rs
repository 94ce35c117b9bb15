//! Energy, interaction potential, balance residuals, concentration events and
//! Hölder estimates.
//!
//! Everything that walks the lattice comes as a row collector that can ride
//! along with [`march`](crate::goursat::march) when the grid is too large to
//! keep, plus a convenience wrapper over a stored [`CharGrid`].

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::coeffs::{derive, CoefficientField, DerivedCoeffs};
use crate::goursat::{CharGrid, GridNode, GridRow, Lattice};
use crate::math::{fabs, lerp, log};
use crate::physmap::{extract_isochrones, IsoPoint, Isochrone, EPS_CONC};
use crate::{Error, Result};

/// Energy budget on one isochrone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub e_ac_minus: f64,
    pub e_ac_plus: f64,
    pub e_atoms: f64,
    pub e_total: f64,
    pub q: f64,
    /// `(E_total − E₀)/E₀`, or `0` when `E₀ = 0`.
    pub rel_drift: f64,
}

fn stalled(a: &IsoPoint, b: &IsoPoint) -> bool {
    fabs(b.x - a.x) <= 1e-12
}

/// Splits the measure increments of each segment into the absolutely
/// continuous part (both ends regular, `x` advancing) and the rest.
pub fn total_energy(iso: &Isochrone, e0: f64) -> EnergyReport {
    let (mut m, mut p, mut atoms) = (0.0, 0.0, 0.0);
    for w in iso.points.windows(2) {
        let dm = w[1].mu_minus_cum - w[0].mu_minus_cum;
        let dp = w[1].mu_plus_cum - w[0].mu_plus_cum;
        if w[0].concentrated || w[1].concentrated || stalled(&w[0], &w[1]) {
            atoms += dm + dp;
        } else {
            m += dm;
            p += dp;
        }
    }
    let e_total = m + p + atoms;
    EnergyReport {
        t: iso.t_star,
        e_ac_minus: m,
        e_ac_plus: p,
        e_atoms: atoms,
        e_total,
        q: interaction_potential(iso),
        rel_drift: if e0 > 0.0 { (e_total - e0) / e0 } else { 0.0 },
    }
}

/// `Q = (μ₋ ⊗ μ₊)({x > y})`. Mass inside a segment of positive length is
/// treated as spread along it; mass at a single `x` does not interact with itself.
pub fn interaction_potential(iso: &Isochrone) -> f64 {
    let mut q = 0.0;
    // First index of the run of points sharing the x of point k − 1.
    let mut run_start = 0usize;
    let pts = &iso.points;
    for k in 1..pts.len() {
        let dm = pts[k].mu_minus_cum - pts[k - 1].mu_minus_cum;
        let dp = pts[k].mu_plus_cum - pts[k - 1].mu_plus_cum;
        if stalled(&pts[k - 1], &pts[k]) {
            q += dm * pts[run_start].mu_plus_cum;
        } else {
            q += dm * (pts[k - 1].mu_plus_cum + 0.5 * dp);
            run_start = k;
        }
    }
    q
}

/// `(R, S)` at an isochrone point from the one-sided triples facing a segment.
fn riemann_pair(p: &IsoPoint, east: bool, south: bool) -> (f64, f64) {
    let psx = if east { p.psx_e } else { p.psx_w };
    let qez = if south { p.qez_s } else { p.qez_n };
    (psx[2] / psx[1], qez[2] / qez[1])
}

/// `∫_{−∞}^{x_probe} G dx` on an isochrone, trapezoid over regular segments.
pub fn source_integral<F: CoefficientField + ?Sized>(iso: &Isochrone, field: &F, x_probe: f64) -> Result<f64> {
    let mut total = 0.0;
    for w in iso.points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.x >= x_probe {
            break;
        }
        if a.concentrated || b.concentrated || stalled(a, b) {
            continue;
        }
        let (ra, sa) = riemann_pair(a, true, true);
        let (rb, sb) = riemann_pair(b, false, false);
        let ga = derive(field, a.x, a.u)?.energy_source(ra, sa);
        let gb = derive(field, b.x, b.u)?.energy_source(rb, sb);
        if b.x <= x_probe {
            total += 0.5 * (ga + gb) * (b.x - a.x);
        } else {
            let s = (x_probe - a.x) / (b.x - a.x);
            let gp = lerp(ga, gb, s);
            total += 0.5 * (ga + gp) * (x_probe - a.x);
        }
    }
    Ok(total)
}

/// `(c₁/α) R̃²` at `x_probe`, interpolated along the isochrone.
pub fn backward_flux<F: CoefficientField + ?Sized>(iso: &Isochrone, field: &F, x_probe: f64) -> Result<f64> {
    let pts = &iso.points;
    let k = pts.partition_point(|p| p.x <= x_probe);
    if k == 0 || k >= pts.len() {
        return Err(Error::OutOfDomain { t: iso.t_star, x: x_probe });
    }
    let (a, b) = (&pts[k - 1], &pts[k]);
    if a.concentrated || b.concentrated {
        return Err(Error::OutOfDomain { t: iso.t_star, x: x_probe });
    }
    let flux = |p: &IsoPoint, psx: [f64; 3]| -> Result<f64> {
        let d = derive(field, p.x, p.u)?;
        Ok(d.c1 / d.alpha * (1.0 - psx[1]) / psx[1])
    };
    // Level sets through lattice nodes leave regular runs of zero length.
    let s = if stalled(a, b) { 0.5 } else { (x_probe - a.x) / (b.x - a.x) };
    Ok(lerp(flux(a, a.psx_e)?, flux(b, b.psx_w)?, s))
}

/// Even number of uniform subintervals of `[t1, t2]` no wider than `h`.
pub fn balance_times(t1: f64, t2: f64, h: f64) -> Vec<f64> {
    let mut n = libm::ceil((t2 - t1) / h) as usize;
    n = (n + n % 2).max(2);
    (0..=n).map(|k| if k == n { t2 } else { t1 + (t2 - t1) * k as f64 / n as f64 }).collect()
}

fn simpson(v: &[f64], dt: f64) -> f64 {
    let n = v.len() - 1;
    let mut s = v[0] + v[n];
    for (k, x) in v.iter().enumerate().take(n).skip(1) {
        s += if k % 2 == 1 { 4.0 * x } else { 2.0 * x };
    }
    s * dt / 3.0
}

/// Defect of the weak backward balance law on `[t1, t2] × (−∞, x_probe]`
/// from isochrones at the uniform times of [`balance_times`]:
/// `μ₋(t₂) − μ₋(t₁) + ∫ (c₁/α)R̃²(t, x_probe) dt − ∫∫ G`.
pub fn balance_residual_from<F: CoefficientField + ?Sized>(isos: &[Isochrone], field: &F, x_probe: f64) -> Result<f64> {
    if isos.len() < 3 || isos.len() % 2 == 0 {
        return Err(Error::InsufficientSamples { needed: 3, found: isos.len() });
    }
    let dt = (isos[isos.len() - 1].t_star - isos[0].t_star) / (isos.len() - 1) as f64;
    let mut flux = Vec::with_capacity(isos.len());
    let mut src = Vec::with_capacity(isos.len());
    for iso in isos {
        flux.push(backward_flux(iso, field, x_probe)?);
        src.push(source_integral(iso, field, x_probe)?);
    }
    let m1 = isos[0].cumulative_at(x_probe)?.0;
    let m2 = isos[isos.len() - 1].cumulative_at(x_probe)?.0;
    Ok(m2 - m1 + simpson(&flux, dt) - simpson(&src, dt))
}

pub fn balance_residual<F: CoefficientField + ?Sized>(
    grid: &CharGrid,
    field: &F,
    t1: f64,
    t2: f64,
    x_probe: f64,
) -> Result<f64> {
    if !(t1 < t2) {
        return Err(Error::OutOfDomain { t: t2, x: x_probe });
    }
    let times = balance_times(t1, t2, grid.lattice.h);
    let isos = extract_isochrones(grid, &times, EPS_CONC).map_err(|_| Error::OutOfDomain { t: t2, x: x_probe })?;
    balance_residual_from(&isos, field, x_probe)
}

/// A lattice node where one family has (nearly) collapsed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcNode {
    pub i: usize,
    pub j: usize,
    pub big_x: f64,
    pub big_y: f64,
    pub t: f64,
    pub x: f64,
    pub u: f64,
    pub sigma: f64,
    pub eta: f64,
}

/// Lattice-connected cluster of concentrated nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationEvent {
    pub nodes: Vec<ConcNode>,
    pub t_range: (f64, f64),
    pub x_range: (f64, f64),
}

impl ConcentrationEvent {
    /// The earliest node of the event.
    pub fn onset(&self) -> &ConcNode {
        self.nodes.iter().min_by(|a, b| a.t.total_cmp(&b.t)).unwrap()
    }

    /// `(∂_u λ₋, ∂_u λ₊)` at the onset. Advisory only.
    pub fn speed_derivatives<F: CoefficientField + ?Sized>(&self, field: &F) -> Result<(f64, f64)> {
        let n = self.onset();
        let d = derive(field, n.x, n.u)?;
        let du = |c: f64, c_u: f64| (c_u * d.alpha - c * d.alpha_u) / (d.alpha * d.alpha);
        Ok((du(d.c1, d.c1_u), du(d.c2, d.c2_u)))
    }
}

fn min_compression(n: &GridNode) -> (f64, f64) {
    (n.psx_e[1].min(n.psx_w[1]), n.qez_n[1].min(n.qez_s[1]))
}

pub struct ConcentrationCollector {
    eps: f64,
    nodes: Vec<ConcNode>,
}

impl ConcentrationCollector {
    pub fn new(eps: f64) -> Self {
        Self { eps, nodes: Vec::new() }
    }

    pub fn visit(&mut self, lat: &Lattice, j: usize, cur: &GridRow) {
        for (i, n) in cur.iter() {
            let (sigma, eta) = min_compression(n);
            if sigma.min(eta) < self.eps {
                self.nodes.push(ConcNode {
                    i,
                    j,
                    big_x: lat.cols[i].coord,
                    big_y: lat.rows[j].coord,
                    t: n.t,
                    x: n.x,
                    u: n.u,
                    sigma,
                    eta,
                });
            }
        }
    }

    /// Cluster flagged nodes by 8-neighbour adjacency.
    pub fn finish(self) -> Vec<ConcentrationEvent> {
        let index: BTreeMap<(usize, usize), usize> =
            self.nodes.iter().enumerate().map(|(k, n)| ((n.i, n.j), k)).collect();
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        fn root(p: &mut [usize], mut k: usize) -> usize {
            while p[k] != k {
                p[k] = p[p[k]];
                k = p[k];
            }
            k
        }
        for (k, n) in self.nodes.iter().enumerate() {
            for (di, dj) in [(1isize, 0isize), (-1, 1), (0, 1), (1, 1)] {
                let (ni, nj) = (n.i as isize + di, n.j as isize + dj);
                if ni < 0 {
                    continue;
                }
                if let Some(&m) = index.get(&(ni as usize, nj as usize)) {
                    let (a, b) = (root(&mut parent, k), root(&mut parent, m));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<ConcNode>> = BTreeMap::new();
        for k in 0..self.nodes.len() {
            let r = root(&mut parent, k);
            groups.entry(r).or_default().push(self.nodes[k]);
        }
        let mut events: Vec<ConcentrationEvent> = groups
            .into_values()
            .map(|nodes| {
                let mut t_range = (f64::INFINITY, f64::NEG_INFINITY);
                let mut x_range = t_range;
                for n in &nodes {
                    t_range = (t_range.0.min(n.t), t_range.1.max(n.t));
                    x_range = (x_range.0.min(n.x), x_range.1.max(n.x));
                }
                ConcentrationEvent { nodes, t_range, x_range }
            })
            .collect();
        events.sort_by(|a, b| a.t_range.0.total_cmp(&b.t_range.0));
        events
    }
}

pub fn detect_concentration(grid: &CharGrid, eps: f64) -> Vec<ConcentrationEvent> {
    let mut c = ConcentrationCollector::new(eps);
    for j in 0..grid.rows.len() {
        c.visit(&grid.lattice, j, &grid.rows[j]);
    }
    c.finish()
}

/// `(t, x)` samples along one lattice column, i.e. one backward characteristic.
pub struct ColumnCollector {
    pub column: usize,
    pub samples: Vec<(f64, f64)>,
}

impl ColumnCollector {
    /// The column closest to `X = big_x`.
    pub fn nearest(lat: &Lattice, big_x: f64) -> Self {
        let k = lat.cols.partition_point(|c| c.coord < big_x);
        let column = if k == 0 {
            0
        } else if k >= lat.nx() || big_x - lat.cols[k - 1].coord < lat.cols[k].coord - big_x {
            k - 1
        } else {
            k
        };
        Self { column, samples: Vec::new() }
    }

    pub fn visit(&mut self, cur: &GridRow) {
        if let Some(n) = cur.get(self.column) {
            self.samples.push((n.t, n.x));
        }
    }
}

/// Fitted exponent `θ` in `|Δx| ≈ C |Δt|^θ` along a characteristic, using the
/// largest increments over dyadic index separations.
pub fn holder_from_samples(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 16 {
        return Err(Error::InsufficientSamples { needed: 16, found: samples.len() });
    }
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut sep = 1;
    while sep < samples.len() {
        let (mut dx, mut dt): (f64, f64) = (0.0, 0.0);
        for k in 0..samples.len() - sep {
            dx = dx.max(fabs(samples[k + sep].1 - samples[k].1));
            dt = dt.max(fabs(samples[k + sep].0 - samples[k].0));
        }
        if dx > 0.0 && dt > 0.0 {
            pts.push((log(dt), log(dx)));
        }
        sep *= 2;
    }
    if pts.len() < 2 {
        // No motion at all: a vertical line is Lipschitz.
        return Ok(1.0);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    crate::math::ls_slope(&xs, &ys).ok_or(Error::InsufficientSamples { needed: 2, found: xs.len() })
}

pub fn holder_estimate(grid: &CharGrid, big_x: f64) -> Result<f64> {
    let mut c = ColumnCollector::nearest(&grid.lattice, big_x);
    for row in &grid.rows {
        c.visit(row);
    }
    holder_from_samples(&c.samples)
}

/// `Σ R̃² S̃² Δx Δt` over `t ≤ T`, evaluated in lattice coordinates where the
/// integrand times the Jacobian is `α(1−σ)(1−η)pq/(c₂−c₁)`, bounded even where
/// both families concentrate.
pub struct InteractionCollector {
    pub t_final: f64,
    pub total: f64,
}

impl InteractionCollector {
    pub fn new(t_final: f64) -> Self {
        Self { t_final, total: 0.0 }
    }

    fn spacing(coords: &[f64], k: usize) -> f64 {
        let lo = if k == 0 { coords[0] } else { coords[k - 1] };
        let hi = if k + 1 == coords.len() { coords[k] } else { coords[k + 1] };
        0.5 * (hi - lo)
    }

    pub fn visit<F: CoefficientField + ?Sized>(
        &mut self,
        field: &F,
        lat: &Lattice,
        ys: &[f64],
        xs: &[f64],
        j: usize,
        cur: &GridRow,
    ) -> Result<()> {
        let dy = Self::spacing(ys, j);
        for (i, n) in cur.iter() {
            if n.t > self.t_final {
                continue;
            }
            let d: DerivedCoeffs = derive(field, n.x, n.u)?;
            let w = d.alpha * (1.0 - n.psx_e[1]) * (1.0 - n.qez_n[1]) * n.psx_e[0] * n.qez_n[0] / d.gap();
            self.total += w * Self::spacing(xs, i) * dy;
        }
        let _ = lat;
        Ok(())
    }
}

pub fn space_time_interaction<F: CoefficientField + ?Sized>(grid: &CharGrid, field: &F, t_final: f64) -> Result<f64> {
    let lat = &grid.lattice;
    let xs: Vec<f64> = lat.cols.iter().map(|c| c.coord).collect();
    let ys: Vec<f64> = lat.rows.iter().map(|r| r.coord).collect();
    let mut c = InteractionCollector::new(t_final);
    for (j, row) in grid.rows.iter().enumerate() {
        c.visit(field, lat, &ys, &xs, j, row)?;
    }
    Ok(c.total)
}

/// Right-hand side of the space-time interaction estimate:
/// `2α₂E₀²/γ₁ + (α₂/γ₁) Ĉ E₀² T (1 + α₂ M̲ Ĉ E₀ /(2γ₁))`.
pub fn interaction_bound(alpha2: f64, gamma1: f64, m_lower: f64, c_hat: f64, e0: f64, t_final: f64) -> f64 {
    let r = alpha2 / gamma1;
    2.0 * r * e0 * e0 + r * c_hat * e0 * e0 * t_final * (1.0 + alpha2 * m_lower * c_hat * e0 / (2.0 * gamma1))
}

/// Largest `|u(x+δ) − u(x)|` over `x` in `[lo, hi]` sampled at `n` points, for each `δ`.
pub fn modulus_of_continuity(iso: &Isochrone, lo: f64, hi: f64, n: usize, deltas: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let mut m: f64 = 0.0;
        for k in 0..n {
            let x = lerp(lo, hi, k as f64 / (n.max(2) - 1) as f64);
            let a = iso.sample_u(x)?;
            let b = iso.sample_u(x + d)?;
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::OutOfDomain { t: iso.t_star, x });
            }
            m = m.max(fabs(b - a));
        }
        out.push((d, m));
    }
    Ok(out)
}
