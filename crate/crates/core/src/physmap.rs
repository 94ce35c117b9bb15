//! Back to physical coordinates: Jacobian of `(X, Ŷ) ↦ (t, x)`, Riemann
//! variables from lattice data, isochrones `t = t*` and samples of `u(t, x)`.

use alloc::vec::Vec;

use crate::coeffs::{derive, CoefficientField, DerivedCoeffs};
use crate::goursat::{rhs_x, rhs_y, CharGrid, CharNode, DomainMode, GridNode, GridRow, Lattice};
use crate::initdata::RiemannState;
use crate::math::{fabs, lerp, lerp3};
use crate::{Error, Result};

/// Default threshold below which `σ` or `η` counts as concentrated.
pub const EPS_CONC: f64 = 1e-6;

/// `det DΛ = (1/c₂ − 1/c₁)·α·x_X·x_Ŷ`. Zero exactly when `σηpq = 0`.
pub fn jacobian_det(node: &CharNode, d: &DerivedCoeffs) -> f64 {
    let x_x = rhs_x(node, d).x;
    let x_y = rhs_y(node, d).x;
    (1.0 / d.c2 - 1.0 / d.c1) * d.alpha * x_x * x_y
}

/// Riemann variables recovered from `(σ, ξ)` and `(η, ζ)`. A family whose
/// compression factor is at or below the floor has no finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub r: Option<f64>,
    pub s: Option<f64>,
    /// `+∞` when the family is concentrated.
    pub rt2: f64,
    pub st2: f64,
}

impl Reconstruction {
    pub fn concentrated(&self) -> bool {
        self.r.is_none() || self.s.is_none()
    }

    /// Finite state, when neither family is concentrated.
    pub fn state(&self) -> Option<RiemannState> {
        Some(RiemannState { r: self.r?, s: self.s?, rt2: self.rt2, st2: self.st2 })
    }
}

fn invert(c: f64, g: f64, eps: f64) -> (Option<f64>, f64) {
    if c > eps {
        (Some(g / c), (1.0 - c) / c)
    } else {
        (None, f64::INFINITY)
    }
}

/// `R = ξ/σ`, `R̃² = (1−σ)/σ` and likewise for `S`.
pub fn reconstruct_riemann(node: &CharNode, eps_floor: f64) -> Reconstruction {
    let (r, rt2) = invert(node.sigma, node.xi, eps_floor);
    let (s, st2) = invert(node.eta, node.zeta, eps_floor);
    Reconstruction { r, s, rt2, st2 }
}

/// Lattice nodes whose Jacobian determinant is below `tol` in magnitude.
pub fn critical_nodes<F: CoefficientField + ?Sized>(
    grid: &CharGrid,
    field: &F,
    tol: f64,
) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (i, j, n) in grid.iter() {
        let d = derive(field, n.x, n.u)?;
        if fabs(jacobian_det(&n.char_node(), &d)) < tol {
            out.push((i, j));
        }
    }
    Ok(out)
}

/// One point of an isochrone. Points on jump lines keep both one-sided triples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoPoint {
    pub big_x: f64,
    pub big_y: f64,
    pub x: f64,
    pub u: f64,
    pub psx_w: [f64; 3],
    pub psx_e: [f64; 3],
    pub qez_s: [f64; 3],
    pub qez_n: [f64; 3],
    pub sigma: f64,
    pub eta: f64,
    pub rt2: f64,
    pub st2: f64,
    pub mu_minus_cum: f64,
    pub mu_plus_cum: f64,
    pub concentrated: bool,
}

impl IsoPoint {
    pub(crate) fn new(big_x: f64, big_y: f64, x: f64, u: f64, psx: [[f64; 3]; 2], qez: [[f64; 3]; 2]) -> Self {
        Self {
            big_x,
            big_y,
            x,
            u,
            psx_w: psx[0],
            psx_e: psx[1],
            qez_s: qez[0],
            qez_n: qez[1],
            sigma: 0.0,
            eta: 0.0,
            rt2: 0.0,
            st2: 0.0,
            mu_minus_cum: 0.0,
            mu_plus_cum: 0.0,
            concentrated: false,
        }
    }

    /// Node view with the east/north one-sided values.
    pub fn char_node(&self, t: f64) -> CharNode {
        CharNode {
            t,
            x: self.x,
            u: self.u,
            p: self.psx_e[0],
            sigma: self.psx_e[1],
            xi: self.psx_e[2],
            q: self.qez_n[0],
            eta: self.qez_n[1],
            zeta: self.qez_n[2],
        }
    }
}

/// A stalled-`x` run on an isochrone: a point mass of the energy measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub x: f64,
    pub mass_minus: f64,
    pub mass_plus: f64,
    /// Index range `first..=last` of the merged points.
    pub first: usize,
    pub last: usize,
}

/// The level set `t = t*` ordered along increasing `X − Ŷ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Isochrone {
    pub t_star: f64,
    pub points: Vec<IsoPoint>,
    pub atoms: Vec<Atom>,
    /// Constant far-field values of `u` left and right of the extracted
    /// range, when the lattice guarantees them.
    pub far_field: Option<(f64, f64)>,
    /// Edges along which `t` was found to decrease.
    pub non_monotone_edges: usize,
}

impl Isochrone {
    /// Totals `(μ₋(ℝ), μ₊(ℝ))`.
    pub fn totals(&self) -> (f64, f64) {
        self.points.last().map(|p| (p.mu_minus_cum, p.mu_plus_cum)).unwrap_or((0.0, 0.0))
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.points.first().map_or(0.0, |p| p.x), self.points.last().map_or(0.0, |p| p.x))
    }

    /// Index `k` with `x_k ≤ x < x_{k+1}`, or the last index when `x` equals the right end.
    fn bracket(&self, x: f64) -> Option<usize> {
        let n = self.points.len();
        if n == 0 {
            return None;
        }
        let (lo, hi) = self.x_range();
        if x < lo || x > hi {
            return None;
        }
        let k = self.points.partition_point(|p| p.x <= x);
        Some(k.saturating_sub(1).min(n - 1))
    }

    /// `u(t*, x)` by linear interpolation between the bracketing points.
    pub fn sample_u(&self, x: f64) -> Result<f64> {
        match self.bracket(x) {
            Some(k) => {
                let a = &self.points[k];
                match self.points.get(k + 1) {
                    Some(b) if b.x > a.x => Ok(lerp(a.u, b.u, (x - a.x) / (b.x - a.x))),
                    _ => Ok(a.u),
                }
            }
            None => match self.far_field {
                Some((ul, ur)) if !self.points.is_empty() => Ok(if x < self.points[0].x { ul } else { ur }),
                _ => Err(Error::OutOfDomain { t: self.t_star, x }),
            },
        }
    }

    /// `(R, S)` at `x` by interpolation; `None` on a concentrated segment.
    pub fn sample_riemann(&self, x: f64) -> Result<Option<(f64, f64)>> {
        let rs = |psx: [f64; 3], qez: [f64; 3]| (psx[2] / psx[1], qez[2] / qez[1]);
        let Some(k) = self.bracket(x) else {
            return match self.far_field {
                Some(_) if !self.points.is_empty() => Ok(Some((0.0, 0.0))),
                _ => Err(Error::OutOfDomain { t: self.t_star, x }),
            };
        };
        let a = &self.points[k];
        match self.points.get(k + 1) {
            Some(b) if b.x > a.x => {
                if a.concentrated || b.concentrated {
                    return Ok(None);
                }
                let s = (x - a.x) / (b.x - a.x);
                let (ra, sa) = rs(a.psx_e, a.qez_s);
                let (rb, sb) = rs(b.psx_w, b.qez_n);
                Ok(Some((lerp(ra, rb, s), lerp(sa, sb, s))))
            }
            _ if a.concentrated => Ok(None),
            _ => Ok(Some(rs(a.psx_e, a.qez_n))),
        }
    }

    /// `(μ₋((−∞, x)), μ₊((−∞, x)))` interpolated along the isochrone.
    pub fn cumulative_at(&self, x: f64) -> Result<(f64, f64)> {
        match self.bracket(x) {
            Some(k) => {
                let a = &self.points[k];
                match self.points.get(k + 1) {
                    Some(b) if b.x > a.x => {
                        let s = (x - a.x) / (b.x - a.x);
                        Ok((lerp(a.mu_minus_cum, b.mu_minus_cum, s), lerp(a.mu_plus_cum, b.mu_plus_cum, s)))
                    }
                    _ => Ok((a.mu_minus_cum, a.mu_plus_cum)),
                }
            }
            None if self.far_field.is_some() && !self.points.is_empty() => {
                Ok(if x < self.points[0].x { (0.0, 0.0) } else { self.totals() })
            }
            None => Err(Error::OutOfDomain { t: self.t_star, x }),
        }
    }

    /// Smallest `x` with `x + μ₋((−∞, x)) ≥ ω` (the backward energy coordinate inverted).
    pub fn x_of_omega(&self, omega: f64) -> Result<f64> {
        self.invert_coordinate(omega, |p| p.mu_minus_cum)
    }

    /// Smallest `x` with `x + μ₊((−∞, x)) ≥ υ`.
    pub fn x_of_upsilon(&self, upsilon: f64) -> Result<f64> {
        self.invert_coordinate(upsilon, |p| p.mu_plus_cum)
    }

    fn invert_coordinate(&self, w: f64, mu: impl Fn(&IsoPoint) -> f64) -> Result<f64> {
        let pts = &self.points;
        if pts.is_empty() {
            return Err(Error::EmptyLevelSet { t: self.t_star });
        }
        let first = pts[0].x + mu(&pts[0]);
        let last = pts[pts.len() - 1].x + mu(&pts[pts.len() - 1]);
        if w < first || w > last {
            if self.far_field.is_some() {
                return Ok(if w < first { w - mu(&pts[0]) } else { w - mu(&pts[pts.len() - 1]) });
            }
            return Err(Error::OutOfDomain { t: self.t_star, x: w });
        }
        // x + μ is nondecreasing up to roundoff; bisection on the index.
        let k = pts.partition_point(|p| p.x + mu(p) < w);
        if k == 0 {
            return Ok(pts[0].x);
        }
        let (a, b) = (&pts[k - 1], &pts[k]);
        let (wa, wb) = (a.x + mu(a), b.x + mu(b));
        if wb <= wa {
            return Ok(b.x);
        }
        Ok(lerp(a.x, b.x, (w - wa) / (wb - wa)))
    }
}

/// Collects isochrone crossings for a fixed list of times while rows of the
/// lattice stream past.
pub struct IsoCollector {
    times: Vec<f64>,
    raw: Vec<Vec<IsoPoint>>,
    non_monotone: usize,
}

impl IsoCollector {
    /// `times` must be positive; `t* = 0` is served from the curve directly.
    pub fn new(times: &[f64]) -> Self {
        let mut times = times.to_vec();
        times.sort_by(|a, b| a.total_cmp(b));
        times.dedup();
        let raw = times.iter().map(|_| Vec::new()).collect();
        Self { times, raw, non_monotone: 0 }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Times crossed along an edge and the interpolation parameters. An edge
    /// where `t` decreases (only seen inside concentration, where the exact
    /// rate vanishes) is counted and interpolated the same way.
    fn hits(&mut self, ta: f64, tb: f64) -> Vec<(usize, f64)> {
        let (lo_t, hi_t) = if tb < ta {
            self.non_monotone += 1;
            (tb, ta)
        } else {
            (ta, tb)
        };
        let lo = self.times.partition_point(|&t| t <= lo_t);
        let hi = self.times.partition_point(|&t| t <= hi_t);
        (lo..hi).map(|k| (k, (self.times[k] - ta) / (tb - ta))).collect()
    }

    /// Edge along a column from `a` (lower `Ŷ`) to `b`.
    fn column_edge(&mut self, big_x: f64, ya: f64, a: &GridNode, yb: f64, b: &GridNode) {
        let hits = self.hits(a.t, b.t);
        for (k, s) in hits {
            let q = lerp3(a.qez_n, b.qez_s, s);
            self.raw[k].push(IsoPoint::new(
                big_x,
                lerp(ya, yb, s),
                lerp(a.x, b.x, s),
                lerp(a.u, b.u, s),
                [lerp3(a.psx_w, b.psx_w, s), lerp3(a.psx_e, b.psx_e, s)],
                [q, q],
            ));
        }
    }

    /// Edge along a row from `a` (lower `X`) to `b`.
    fn row_edge(&mut self, big_y: f64, xa: f64, a: &GridNode, xb: f64, b: &GridNode) {
        let hits = self.hits(a.t, b.t);
        for (k, s) in hits {
            let p = lerp3(a.psx_e, b.psx_w, s);
            self.raw[k].push(IsoPoint::new(
                lerp(xa, xb, s),
                big_y,
                lerp(a.x, b.x, s),
                lerp(a.u, b.u, s),
                [p, p],
                [lerp3(a.qez_s, b.qez_s, s), lerp3(a.qez_n, b.qez_n, s)],
            ));
        }
    }

    /// Scan row `j` and the column edges joining it to row `j − 1`.
    pub fn visit(&mut self, lat: &Lattice, j: usize, prev: Option<&GridRow>, cur: &GridRow) {
        let yj = lat.rows[j].coord;
        if let Some(first) = cur.nodes.first() {
            let i0 = cur.start;
            if i0 > 0 && !lat.on_curve(i0, j) && !lat.is_ghost(i0, j) && !lat.in_domain(i0 - 1, j) {
                let r = &lat.rows[j];
                self.row_edge(yj, r.cross, &r.curve, lat.cols[i0].coord, first);
            }
        }
        for (k, w) in cur.nodes.windows(2).enumerate() {
            let i = cur.start + k;
            self.row_edge(yj, lat.cols[i].coord, &w[0], lat.cols[i + 1].coord, &w[1]);
        }
        for (i, n) in cur.iter() {
            let xi = lat.cols[i].coord;
            match prev.and_then(|p| p.get(i)) {
                Some(s) => self.column_edge(xi, lat.rows[j - 1].coord, s, yj, n),
                None => {
                    let below_curve = j == 0 || !lat.in_domain(i, j - 1);
                    if below_curve && !lat.on_curve(i, j) && !lat.is_ghost(i, j) {
                        let c = &lat.cols[i];
                        self.column_edge(xi, c.cross, &c.curve, yj, n);
                    }
                }
            }
        }
    }

    /// Order, deduplicate and accumulate measures.
    pub fn finish(self, lat: &Lattice, eps_conc: f64) -> Result<Vec<Isochrone>> {
        let far = (lat.mode == DomainMode::Ghost).then_some((lat.far[0].0, lat.far[1].0));
        let mut out = Vec::with_capacity(self.times.len());
        for (t_star, mut pts) in self.times.into_iter().zip(self.raw) {
            if pts.is_empty() {
                return Err(Error::EmptyLevelSet { t: t_star });
            }
            pts.sort_by(|a, b| (a.big_x - a.big_y).total_cmp(&(b.big_x - b.big_y)));
            pts.dedup_by(|b, a| b.big_x == a.big_x && b.big_y == a.big_y);
            out.push(finalize(t_star, pts, far, eps_conc, self.non_monotone));
        }
        Ok(out)
    }
}

pub(crate) fn finalize(t_star: f64, mut pts: Vec<IsoPoint>, far: Option<(f64, f64)>, eps: f64, nm: usize) -> Isochrone {
    for p in pts.iter_mut() {
        p.sigma = p.psx_e[1];
        p.eta = p.qez_n[1];
        p.concentrated = p.psx_e[1].min(p.psx_w[1]) < eps || p.qez_n[1].min(p.qez_s[1]) < eps;
        p.rt2 = if p.sigma > eps { (1.0 - p.sigma) / p.sigma } else { f64::INFINITY };
        p.st2 = if p.eta > eps { (1.0 - p.eta) / p.eta } else { f64::INFINITY };
    }
    let mut atoms: Vec<Atom> = Vec::new();
    let (mut mm, mut mp) = (0.0, 0.0);
    for k in 1..pts.len() {
        let (a, b) = (pts[k - 1], pts[k]);
        let dx = b.x - a.x;
        let dm = 0.5 * (a.psx_e[0] + b.psx_w[0]) * (b.big_x - a.big_x) - dx;
        let dp = 0.5 * (a.qez_s[0] + b.qez_n[0]) * (a.big_y - b.big_y) - dx;
        mm += dm;
        mp += dp;
        pts[k].mu_minus_cum = mm;
        pts[k].mu_plus_cum = mp;
        if fabs(dx) <= 1e-12 {
            match atoms.last_mut() {
                Some(at) if at.last == k - 1 => {
                    at.last = k;
                    at.mass_minus += dm;
                    at.mass_plus += dp;
                }
                _ => atoms.push(Atom { x: a.x, mass_minus: dm, mass_plus: dp, first: k - 1, last: k }),
            }
        }
    }
    Isochrone { t_star, points: pts, atoms, far_field: far, non_monotone_edges: nm }
}

/// The initial curve as an isochrone at `t = 0`, sampled at every lattice line foot.
pub fn curve_isochrone(lat: &Lattice, eps_conc: f64) -> Isochrone {
    let mut pts: Vec<IsoPoint> = Vec::with_capacity(lat.nx() + lat.ny());
    let (lo, hi) = lat.curve_range;
    let mut push = |c: &GridNode, big_x: f64, big_y: f64| {
        if c.x >= lo && c.x <= hi {
            pts.push(IsoPoint::new(big_x, big_y, c.x, c.u, [c.psx_w, c.psx_e], [c.qez_s, c.qez_n]));
        }
    };
    for c in &lat.cols {
        push(&c.curve, c.coord, c.cross);
    }
    for r in &lat.rows {
        push(&r.curve, r.cross, r.coord);
    }
    pts.sort_by(|a, b| a.x.total_cmp(&b.x));
    pts.dedup_by(|b, a| b.x == a.x);
    let far = (lat.mode == DomainMode::Ghost).then_some((lat.far[0].0, lat.far[1].0));
    finalize(0.0, pts, far, eps_conc, 0)
}

/// Isochrones of a stored grid at the requested times (`0` allowed).
pub fn extract_isochrones(grid: &CharGrid, times: &[f64], eps_conc: f64) -> Result<Vec<Isochrone>> {
    let positive: Vec<f64> = times.iter().copied().filter(|&t| t > 0.0).collect();
    for &t in times {
        if !(t >= 0.0) || t > grid.stats.max_t {
            return Err(Error::EmptyLevelSet { t });
        }
    }
    let mut col = IsoCollector::new(&positive);
    let lat = &grid.lattice;
    grid.replay(|j, prev, cur| {
        col.visit(lat, j, prev, cur);
        Ok(())
    })?;
    let sorted_times: Vec<f64> = col.times().to_vec();
    let found = col.finish(lat, eps_conc)?;
    times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                Ok(curve_isochrone(lat, eps_conc))
            } else {
                let k = sorted_times.iter().position(|&s| s == t).unwrap();
                Ok(found[k].clone())
            }
        })
        .collect()
}

pub fn extract_isochrone(grid: &CharGrid, t_star: f64) -> Result<Isochrone> {
    Ok(extract_isochrones(grid, &[t_star], EPS_CONC)?.remove(0))
}

/// `u(t*, x*)` from a stored grid.
pub fn sample_u(grid: &CharGrid, t_star: f64, x_star: f64) -> Result<f64> {
    extract_isochrone(grid, t_star).map_err(|_| Error::OutOfDomain { t: t_star, x: x_star })?.sample_u(x_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{Constant, LiquidCrystal};
    use crate::goursat::{solve, SolveOptions};
    use crate::initdata::InitialData;

    #[test]
    fn jacobian_of_rest_state() {
        let n = CharNode::rest(0.0, 0.0, 0.0);
        let d = derive(&Constant::new(1.0, 0.0, 1.0), 0.0, 0.0).unwrap();
        assert_eq!(jacobian_det(&n, &d), -0.5);
        let d = derive(&Constant::new(1.0, 0.0, 2.0), 0.0, 0.0).unwrap();
        assert_eq!(jacobian_det(&n, &d), -0.25);
        let vac = CharNode { sigma: 0.0, ..n };
        assert_eq!(jacobian_det(&vac, &d), 0.0);
    }

    #[test]
    fn reconstruction_cases() {
        let n = CharNode::rest(0.0, 0.0, 0.0);
        let r = reconstruct_riemann(&n, EPS_CONC);
        assert_eq!((r.r, r.rt2), (Some(0.0), 0.0));
        let n = CharNode { sigma: 2.0 / 3.0, xi: 2.0 / 3.0, ..n };
        let r = reconstruct_riemann(&n, EPS_CONC);
        assert!((r.r.unwrap() - 1.0).abs() < 1e-15 && (r.rt2 - 0.5).abs() < 1e-15);
        let n = CharNode { sigma: 1e-14, xi: 1e-7, ..n };
        let r = reconstruct_riemann(&n, EPS_CONC);
        assert!(r.concentrated() && r.r.is_none() && r.rt2 == f64::INFINITY);
    }

    #[test]
    fn pulse_isochrone() {
        let f = Constant::new(1.0, 0.0, 1.0);
        let d = InitialData::pulse(1.0, 0.0, 1.0).unwrap();
        let g = solve(&f, &d, SolveOptions::new(1.0 / 64.0, 1.0)).unwrap();
        let isos = extract_isochrones(&g, &[0.0, 0.25, 1.0], EPS_CONC).unwrap();
        let c0 = &isos[0];
        assert!((c0.totals().0 - 0.5).abs() < 1e-14 && (c0.totals().1 - 0.5).abs() < 1e-14);
        let iso = &isos[1];
        assert!((iso.sample_u(0.5).unwrap() - 0.25).abs() < 1e-13);
        assert_eq!(iso.sample_u(-5.0).unwrap(), 0.0);
        let (m, p) = iso.totals();
        assert!((m + p - 1.0).abs() < 1e-12, "{m} {p}");
        assert!(iso.points.windows(2).all(|w| w[1].x >= w[0].x - 1e-14));
        assert_eq!(iso.non_monotone_edges, 0);
        assert!(extract_isochrone(&g, 10.0).is_err());
        assert!((sample_u(&g, 1.0, 0.5).unwrap() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn liquid_crystal_energy_is_conserved_roughly() {
        let f = LiquidCrystal::new(1.0, 4.0);
        let d = InitialData::hat(0.3, 0.8, -0.5, 0.5).unwrap();
        let g = solve(&f, &d, SolveOptions::new(1.0 / 64.0, 0.6)).unwrap();
        let e0 = crate::initdata::total_initial_energy(&f, &d).unwrap();
        for iso in extract_isochrones(&g, &[0.0, 0.3, 0.6], EPS_CONC).unwrap() {
            let (m, p) = iso.totals();
            assert!(((m + p) - e0).abs() < 1e-2 * e0, "t={} E={} E0={e0}", iso.t_star, m + p);
        }
    }
}
