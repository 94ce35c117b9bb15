//! Initial data `(u₀, u₁)`, the initial Riemann variables, the cumulative
//! energy coordinates `X(x)`, `Y(x)` and the boundary data they induce on the
//! initial curve.

use alloc::vec::Vec;

use crate::coeffs::{derive, CoefficientField};
use crate::math::{fabs, gauss_legendre};
use crate::{Error, Result};

/// Which one-sided limit to take at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Side {
    Left,
    #[default]
    Right,
}

/// Continuous piecewise-linear function, constant outside its breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.is_empty() || breaks.len() != values.len() {
            return Err(Error::InvalidData("u0 needs matching, nonempty breakpoints and values"));
        }
        check_increasing(&breaks)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("u0 values must be finite"));
        }
        Ok(Self { breaks, values })
    }

    pub fn constant(value: f64) -> Self {
        Self { breaks: alloc::vec![0.0], values: alloc::vec![value] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let b = &self.breaks;
        let n = b.len();
        if x <= b[0] {
            return self.values[0];
        }
        if x >= b[n - 1] {
            return self.values[n - 1];
        }
        let i = b.partition_point(|&z| z <= x) - 1;
        let s = (x - b[i]) / (b[i + 1] - b[i]);
        self.values[i] + (self.values[i + 1] - self.values[i]) * s
    }

    pub fn slope(&self, x: f64, side: Side) -> f64 {
        match cell_of(&self.breaks, x, side) {
            Some(i) => (self.values[i + 1] - self.values[i]) / (self.breaks[i + 1] - self.breaks[i]),
            None => 0.0,
        }
    }
}

/// Piecewise-constant function, `values[i]` on `(breaks[i], breaks[i+1])`, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 && !values.is_empty() || breaks.len() >= 2 && values.len() + 1 != breaks.len() {
            return Err(Error::InvalidData("u1 needs one value per breakpoint interval"));
        }
        check_increasing(&breaks)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("u1 values must be finite"));
        }
        Ok(Self { breaks, values })
    }

    pub fn zero() -> Self {
        Self { breaks: Vec::new(), values: Vec::new() }
    }

    pub fn eval(&self, x: f64, side: Side) -> f64 {
        match cell_of(&self.breaks, x, side) {
            Some(i) => self.values[i],
            None => 0.0,
        }
    }
}

fn check_increasing(b: &[f64]) -> Result<()> {
    if b.iter().any(|v| !v.is_finite()) || b.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidData("breakpoints must be finite and strictly increasing"));
    }
    Ok(())
}

/// Index of the cell `[b[i], b[i+1]]` holding `x`, with ties at breakpoints
/// resolved by `side`. `None` outside the breakpoint range.
fn cell_of(b: &[f64], x: f64, side: Side) -> Option<usize> {
    let n = b.len();
    if n < 2 {
        return None;
    }
    match side {
        Side::Right => {
            if x < b[0] || x >= b[n - 1] {
                None
            } else {
                Some(b.partition_point(|&z| z <= x) - 1)
            }
        }
        Side::Left => {
            if x <= b[0] || x > b[n - 1] {
                None
            } else {
                Some(b.partition_point(|&z| z < x) - 1)
            }
        }
    }
}

/// Compactly supported finite-energy initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: PiecewiseLinear,
    pub u1: PiecewiseConstant,
    pub support: (f64, f64),
}

impl InitialData {
    /// Checks that `u₀` is constant and `u₁` vanishes outside `support`.
    pub fn new(u0: PiecewiseLinear, u1: PiecewiseConstant, support: (f64, f64)) -> Result<Self> {
        let (a, b) = support;
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(Error::InvalidData("support must be a finite interval"));
        }
        let tol = 1e-12 * (1.0 + fabs(a) + fabs(b));
        let (ua, ub) = (u0.eval(a), u0.eval(b));
        let flat_left = u0.breaks.iter().zip(&u0.values).all(|(&z, &v)| z > a || v == ua);
        let flat_right = u0.breaks.iter().zip(&u0.values).all(|(&z, &v)| z < b || v == ub);
        let u1_inside =
            u1.breaks.windows(2).zip(&u1.values).all(|(w, &v)| v == 0.0 || (w[0] >= a - tol && w[1] <= b + tol));
        if !(flat_left && flat_right && u1_inside) {
            return Err(Error::InvalidData("data must be constant/zero outside the support"));
        }
        Ok(Self { u0, u1, support })
    }

    pub fn from_arrays(
        u0_breakpoints: Vec<f64>,
        u0_values: Vec<f64>,
        u1_breakpoints: Vec<f64>,
        u1_values: Vec<f64>,
        support: (f64, f64),
    ) -> Result<Self> {
        Self::new(
            PiecewiseLinear::new(u0_breakpoints, u0_values)?,
            PiecewiseConstant::new(u1_breakpoints, u1_values)?,
            support,
        )
    }

    /// `u₀ ≡ base`, `u₁ ≡ 0` on the given support.
    pub fn zero(base: f64, support: (f64, f64)) -> Self {
        Self { u0: PiecewiseLinear::constant(base), u1: PiecewiseConstant::zero(), support }
    }

    /// `u₀ ≡ 0`, `u₁ = amplitude` on `(a, b)`.
    pub fn pulse(amplitude: f64, a: f64, b: f64) -> Result<Self> {
        Self::from_arrays(alloc::vec![a, b], alloc::vec![0.0, 0.0], alloc::vec![a, b], alloc::vec![amplitude], (a, b))
    }

    /// Symmetric tent on `[a, b]` rising from `base` to `base + height`, `u₁ ≡ 0`.
    pub fn hat(base: f64, height: f64, a: f64, b: f64) -> Result<Self> {
        let m = 0.5 * (a + b);
        Self::from_arrays(alloc::vec![a, m, b], alloc::vec![base, base + height, base], Vec::new(), Vec::new(), (a, b))
    }

    /// Piecewise-linear interpolant of the bump `base + amp·cos²(π(x−m)/(b−a))`
    /// on `[a, b]` with `pieces` equal segments, `u₁ ≡ 0`.
    pub fn gauss_like(base: f64, amp: f64, a: f64, b: f64, pieces: usize) -> Result<Self> {
        if pieces < 2 {
            return Err(Error::InvalidData("gauss-like data needs at least two pieces"));
        }
        let m = 0.5 * (a + b);
        let breaks: Vec<f64> = (0..=pieces).map(|k| a + (b - a) * k as f64 / pieces as f64).collect();
        let values = breaks
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                if k == 0 || k == pieces {
                    base
                } else {
                    let c = crate::math::cos(core::f64::consts::PI * (x - m) / (b - a));
                    base + amp * c * c
                }
            })
            .collect();
        Self::from_arrays(breaks, values, Vec::new(), Vec::new(), (a, b))
    }

    /// Sorted union of all breakpoints and the support ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut z: Vec<f64> =
            self.u0.breaks.iter().chain(&self.u1.breaks).copied().chain([self.support.0, self.support.1]).collect();
        z.sort_by(|a, b| a.total_cmp(b));
        z.dedup();
        z
    }

    /// Far-field values of `u₀` to the left and right.
    pub fn far_field(&self) -> (f64, f64) {
        (self.u0.values[0], *self.u0.values.last().unwrap())
    }
}

/// Riemann variables and tilted energy densities at one physical point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RiemannState {
    pub r: f64,
    pub s: f64,
    pub rt2: f64,
    pub st2: f64,
}

fn riemann_from<F: CoefficientField + ?Sized>(field: &F, x: f64, u: f64, ux: f64, ut: f64) -> Result<RiemannState> {
    let d = derive(field, x, u)?;
    let r = d.alpha * ut + d.c2 * ux;
    let s = d.alpha * ut + d.c1 * ux;
    let (wr, ws) = d.energy_weights();
    Ok(RiemannState { r, s, rt2: wr * r * r, st2: ws * s * s })
}

/// `R = αu₁ + c₂u₀ₓ`, `S = αu₁ + c₁u₀ₓ` at `t = 0`; right-cell values at breakpoints.
pub fn riemann_init<F: CoefficientField + ?Sized>(field: &F, data: &InitialData, x: f64) -> Result<RiemannState> {
    riemann_init_sided(field, data, x, Side::Right)
}

pub fn riemann_init_sided<F: CoefficientField + ?Sized>(
    field: &F,
    data: &InitialData,
    x: f64,
    side: Side,
) -> Result<RiemannState> {
    riemann_from(field, x, data.u0.eval(x), data.u0.slope(x, side), data.u1.eval(x, side))
}

/// Per-cell description of the data: `u₀` affine, `u₁` constant.
#[derive(Debug, Clone, Copy)]
struct Cell {
    lo: f64,
    hi: f64,
    u_lo: f64,
    ux: f64,
    ut: f64,
    pieces: usize,
}

/// Cumulative energy coordinates and exact boundary records for one
/// coefficient field and one set of initial data.
pub struct Boundary<'f, F: CoefficientField + ?Sized> {
    field: &'f F,
    data: InitialData,
    cells: Vec<Cell>,
    /// `∫_{-∞}^{z_k} R̃²` and `∫_{-∞}^{z_k} S̃²` at the merged breakpoints `z_k`.
    cum_r: Vec<f64>,
    cum_s: Vec<f64>,
    e0: f64,
}

/// One record of the boundary curve: the nine unknowns together with `X, Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryRecord {
    pub x: f64,
    pub big_x: f64,
    pub big_y: f64,
    pub t: f64,
    pub u: f64,
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
    pub eta: f64,
    pub xi: f64,
    pub zeta: f64,
}

/// `(σ, ξ)` or `(η, ζ)` from a Riemann variable and its tilted square.
#[inline]
pub fn compress(r: f64, rt2: f64) -> (f64, f64) {
    let sigma = 1.0 / (1.0 + rt2);
    (sigma, r * sigma)
}

impl<'f, F: CoefficientField + ?Sized> Boundary<'f, F> {
    pub fn new(field: &'f F, data: &InitialData) -> Result<Self> {
        let z = data.breakpoints();
        let mut cells = Vec::with_capacity(z.len().saturating_sub(1));
        for w in z.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let ux = data.u0.slope(mid, Side::Right);
            let ut = data.u1.eval(mid, Side::Right);
            let u_lo = data.u0.eval(w[0]);
            let span = fabs(ux) * (w[1] - w[0]);
            let pieces = 1 + ((span.max(w[1] - w[0])) / 0.05) as usize;
            cells.push(Cell { lo: w[0], hi: w[1], u_lo, ux, ut, pieces });
        }
        let mut b = Self { field, data: data.clone(), cells, cum_r: Vec::new(), cum_s: Vec::new(), e0: 0.0 };
        let (mut acc_r, mut acc_s, mut acc_e) = (0.0, 0.0, 0.0);
        b.cum_r.push(0.0);
        b.cum_s.push(0.0);
        for k in 0..b.cells.len() {
            let c = b.cells[k];
            let (ir, is) = b.cell_integral(k, c.lo, c.hi)?;
            acc_r += ir;
            acc_s += is;
            acc_e += b.energy_integral(k)?;
            b.cum_r.push(acc_r);
            b.cum_s.push(acc_s);
        }
        let via_riemann = acc_r + acc_s;
        if fabs(via_riemann - acc_e) > 1e-10 * acc_e {
            return Err(Error::InvalidData("energy formulas disagree"));
        }
        b.e0 = acc_e;
        Ok(b)
    }

    pub fn field(&self) -> &'f F {
        self.field
    }

    pub fn data(&self) -> &InitialData {
        &self.data
    }

    /// Total initial energy `E₀ = ∫ α²u₁² + γ²u₀ₓ²`.
    pub fn e0(&self) -> f64 {
        self.e0
    }

    /// `(∫R̃², ∫S̃²)` over the whole line at `t = 0`.
    pub fn totals(&self) -> (f64, f64) {
        (*self.cum_r.last().unwrap(), *self.cum_s.last().unwrap())
    }

    /// Merged breakpoints of the data.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut z: Vec<f64> = self.cells.iter().map(|c| c.lo).collect();
        if let Some(c) = self.cells.last() {
            z.push(c.hi);
        }
        if z.is_empty() {
            z.push(self.data.support.0);
        }
        z
    }

    fn cell_state(&self, k: usize, x: f64) -> Result<RiemannState> {
        let c = &self.cells[k];
        riemann_from(self.field, x, c.u_lo + c.ux * (x - c.lo), c.ux, c.ut)
    }

    fn cell_integral(&self, k: usize, a: f64, b: f64) -> Result<(f64, f64)> {
        let pieces = self.cells[k].pieces;
        let mut err = None;
        let mut density = |x: f64, forward: bool| match self.cell_state(k, x) {
            Ok(s) => {
                if forward {
                    s.st2
                } else {
                    s.rt2
                }
            }
            Err(e) => {
                err = Some(e);
                0.0
            }
        };
        let ir = gauss_legendre(|x| density(x, false), a, b, pieces);
        let is = gauss_legendre(|x| density(x, true), a, b, pieces);
        match err {
            Some(e) => Err(e),
            None => Ok((ir, is)),
        }
    }

    fn energy_integral(&self, k: usize) -> Result<f64> {
        let c = self.cells[k];
        let mut err = None;
        let v = gauss_legendre(
            |x| {
                let s = self.field.sample(x, c.u_lo + c.ux * (x - c.lo));
                if !(s.alpha > 0.0 && s.gamma > 0.0) {
                    err = Some(Error::Domain { x, u: c.u_lo });
                }
                s.alpha * s.alpha * c.ut * c.ut + s.gamma * s.gamma * c.ux * c.ux
            },
            c.lo,
            c.hi,
            c.pieces,
        );
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// Index of the data cell containing `x` (interior or endpoint), if any.
    fn locate(&self, x: f64) -> Option<usize> {
        let n = self.cells.len();
        if n == 0 || x < self.cells[0].lo || x > self.cells[n - 1].hi {
            return None;
        }
        let k = self.cells.partition_point(|c| c.hi < x);
        Some(k.min(n - 1))
    }

    /// `(X(x), Y(x))`.
    pub fn coords(&self, x: f64) -> Result<(f64, f64)> {
        let (r, s) = self.cumulative(x)?;
        Ok((x + r, x + s))
    }

    /// `(∫_{-∞}^x R̃², ∫_{-∞}^x S̃²)` at `t = 0`.
    pub fn cumulative(&self, x: f64) -> Result<(f64, f64)> {
        match self.locate(x) {
            None => {
                if self.cells.is_empty() || x < self.cells[0].lo {
                    Ok((0.0, 0.0))
                } else {
                    Ok(self.totals())
                }
            }
            Some(k) => {
                let (ir, is) = self.cell_integral(k, self.cells[k].lo, x)?;
                Ok((self.cum_r[k] + ir, self.cum_s[k] + is))
            }
        }
    }

    /// Inverse of `X(x)` (`forward = false`) or `Y(x)` (`forward = true`).
    fn invert(&self, target: f64, forward: bool) -> Result<f64> {
        let cum = if forward { &self.cum_s } else { &self.cum_r };
        let n = self.cells.len();
        if n == 0 {
            return Ok(target);
        }
        let node = |k: usize| if k < n { self.cells[k].lo } else { self.cells[n - 1].hi };
        if target <= node(0) {
            return Ok(target);
        }
        let last = node(n) + cum[n];
        if target >= last {
            return Ok(target - cum[n]);
        }
        // First node whose coordinate exceeds the target.
        let (mut k, mut top) = (0, n);
        while top - k > 1 {
            let mid = (k + top) / 2;
            if node(mid) + cum[mid] <= target {
                k = mid;
            } else {
                top = mid;
            }
        }
        let (mut lo, mut hi) = (self.cells[k].lo, self.cells[k].hi);
        let base = cum[k];
        let mut x = lo + (target - lo - base) / (1.0 + (cum[k + 1] - base) / (hi - lo));
        for _ in 0..100 {
            let (ir, is) = self.cell_integral(k, self.cells[k].lo, x)?;
            let st = self.cell_state(k, x)?;
            let (val, dens) = if forward { (x + base + is, st.st2) } else { (x + base + ir, st.rt2) };
            let f = val - target;
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if fabs(f) <= 4.0 * f64::EPSILON * (1.0 + fabs(target)) {
                return Ok(x);
            }
            let mut next = x - f / (1.0 + dens);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if next == x || hi - lo <= 2.0 * f64::EPSILON * (1.0 + fabs(x)) {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }

    pub fn x_of_big_x(&self, big_x: f64) -> Result<f64> {
        self.invert(big_x, false)
    }

    pub fn x_of_big_y(&self, big_y: f64) -> Result<f64> {
        self.invert(big_y, true)
    }

    /// Riemann state with independent one-sided limits for `R` and `S`.
    pub fn riemann(&self, x: f64, r_side: Side, s_side: Side) -> Result<(f64, RiemannState)> {
        let d = &self.data;
        let u = d.u0.eval(x);
        let a = riemann_from(self.field, x, u, d.u0.slope(x, r_side), d.u1.eval(x, r_side))?;
        let st = if s_side == r_side {
            a
        } else {
            riemann_from(self.field, x, u, d.u0.slope(x, s_side), d.u1.eval(x, s_side))?
        };
        Ok((u, RiemannState { r: a.r, s: st.s, rt2: a.rt2, st2: st.st2 }))
    }

    /// Boundary record at `x` with one-sided choices for `R` and `S`.
    pub fn record_sided(&self, x: f64, r_side: Side, s_side: Side) -> Result<BoundaryRecord> {
        let (u, rs) = self.riemann(x, r_side, s_side)?;
        let (big_x, big_y) = self.coords(x)?;
        let (sigma, xi) = compress(rs.r, rs.rt2);
        let (eta, zeta) = compress(rs.s, rs.st2);
        Ok(BoundaryRecord { x, big_x, big_y, t: 0.0, u, p: 1.0, q: 1.0, sigma, eta, xi, zeta })
    }

    pub fn record(&self, x: f64) -> Result<BoundaryRecord> {
        self.record_sided(x, Side::Right, Side::Right)
    }
}

/// `(X(x), Y(x))`.
pub fn cumulative_coords<F: CoefficientField + ?Sized>(field: &F, data: &InitialData, x: f64) -> Result<(f64, f64)> {
    Boundary::new(field, data)?.coords(x)
}

/// `E₀`, cross-checked between the two energy formulas.
pub fn total_initial_energy<F: CoefficientField + ?Sized>(field: &F, data: &InitialData) -> Result<f64> {
    Ok(Boundary::new(field, data)?.e0())
}

/// Sampled boundary curve along increasing `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub records: Vec<BoundaryRecord>,
}

/// Sample the boundary curve on `range` with `resolution` uniform points plus
/// every data breakpoint inside the range.
pub fn build_boundary_curve<F: CoefficientField + ?Sized>(
    field: &F,
    data: &InitialData,
    range: (f64, f64),
    resolution: usize,
) -> Result<BoundaryCurve> {
    if resolution < 2 {
        return Err(Error::InvalidData("boundary curve needs at least two samples"));
    }
    let b = Boundary::new(field, data)?;
    let (lo, hi) = range;
    let mut xs: Vec<f64> = (0..resolution).map(|k| lo + (hi - lo) * k as f64 / (resolution - 1) as f64).collect();
    xs.extend(b.breakpoints().into_iter().filter(|&z| z > lo && z < hi));
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    let records = xs.iter().map(|&x| b.record(x)).collect::<Result<Vec<_>>>()?;
    for (i, w) in records.windows(2).enumerate() {
        if !(w[1].big_x > w[0].big_x && w[1].big_y > w[0].big_y) {
            return Err(Error::NonMonotoneCurve { index: i + 1 });
        }
    }
    Ok(BoundaryCurve { records })
}
