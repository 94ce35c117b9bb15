//! Coefficient fields `(α, β, γ)(x, u)` and everything derived from them.
//!
//! A [`CoefficientField`] hands out point samples of the three fields together
//! with their first partials. [`derive`] turns a sample into characteristic
//! speeds λ±, signed wave speeds `c₁ = αλ₋ < 0 < c₂ = αλ₊`, their partials, and
//! the source coefficients `a₁, a₂, b, d₁, d₂` of the Riemann-variable system
//!
//! ```text
//! α R_t + c₁ R_x =  a₁R² − (a₁+a₂)RS + a₂S² + c₂ b S − d₁ R
//! α S_t + c₂ S_x = −a₁R² + (a₁+a₂)RS − a₂S² + c₁ b R − d₂ S
//! ```

use alloc::vec::Vec;

use crate::math::{cos, fabs, sin, sqrt};
use crate::{Error, Result};

/// Values and first partials of `α, β, γ` at one point `(x, u)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoeffSample {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub alpha_x: f64,
    pub alpha_u: f64,
    pub beta_x: f64,
    pub beta_u: f64,
    pub gamma_x: f64,
    pub gamma_u: f64,
}

/// Declared admissibility constants: `α₁ ≤ α ≤ α₂`, `|β| ≤ β₂`, `γ₁ ≤ γ ≤ γ₂`
/// and a bound on the gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffBounds {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub grad_sup: f64,
}

impl CoeffBounds {
    fn root(&self) -> f64 {
        sqrt(self.beta2 * self.beta2 + self.alpha2 * self.alpha2 * self.gamma2 * self.gamma2)
    }

    /// Lower bound `N̲` on `|λ±|`.
    pub fn n_lower(&self) -> f64 {
        self.gamma1 * self.gamma1 / (self.beta2 + self.root())
    }

    /// Upper bound `N̄` on `|λ±|`.
    pub fn n_upper(&self) -> f64 {
        (self.beta2 + self.root()) / (self.alpha1 * self.alpha1)
    }

    /// `M̲`, defined through `1/M̲ ≤ |cᵢ/(c₂−c₁)|`.
    pub fn m_lower(&self) -> f64 {
        let r = self.root();
        2.0 * (self.beta2 * self.beta2 + self.alpha2 * self.alpha2 * self.gamma2 * self.gamma2 + self.beta2 * r)
            / (self.alpha1 * self.alpha1 * self.gamma1 * self.gamma1)
    }

    /// `M̄ ≥ |cᵢ/(c₂−c₁)|`.
    pub fn m_upper(&self) -> f64 {
        (self.beta2 + self.root()) / (2.0 * self.alpha1 * self.gamma1)
    }

    /// Lower bound `2γ₁/α₂` on `(c₂−c₁)/α = λ₊ − λ₋`.
    pub fn speed_gap_lower(&self) -> f64 {
        2.0 * self.gamma1 / self.alpha2
    }
}

/// A coefficient triple satisfying the admissibility conditions on its declared bounds.
pub trait CoefficientField: Sync {
    fn sample(&self, x: f64, u: f64) -> CoeffSample;

    fn bounds(&self) -> CoeffBounds;

    /// True when no coefficient depends on `x`. Constant states then stay
    /// exactly constant, which the lattice solver exploits to truncate its domain.
    fn x_independent(&self) -> bool {
        false
    }
}

impl<T: CoefficientField + ?Sized> CoefficientField for &T {
    fn sample(&self, x: f64, u: f64) -> CoeffSample {
        (**self).sample(x, u)
    }
    fn bounds(&self) -> CoeffBounds {
        (**self).bounds()
    }
    fn x_independent(&self) -> bool {
        (**self).x_independent()
    }
}

impl<T: CoefficientField + ?Sized> CoefficientField for alloc::boxed::Box<T> {
    fn sample(&self, x: f64, u: f64) -> CoeffSample {
        (**self).sample(x, u)
    }
    fn bounds(&self) -> CoeffBounds {
        (**self).bounds()
    }
    fn x_independent(&self) -> bool {
        (**self).x_independent()
    }
}

/// Constant coefficients ("linear" scenario).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Constant {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }
}

impl CoefficientField for Constant {
    fn sample(&self, _x: f64, _u: f64) -> CoeffSample {
        CoeffSample { alpha: self.alpha, beta: self.beta, gamma: self.gamma, ..Default::default() }
    }

    fn bounds(&self) -> CoeffBounds {
        CoeffBounds {
            alpha1: self.alpha,
            alpha2: self.alpha,
            beta2: fabs(self.beta),
            gamma1: self.gamma,
            gamma2: self.gamma,
            grad_sup: 0.0,
        }
    }

    fn x_independent(&self) -> bool {
        true
    }
}

/// Nematic liquid-crystal wave speed: `α = 1, β = 0, γ = c(u)` with
/// `c²(u) = K₁ cos²u + K₂ sin²u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiquidCrystal {
    pub k1: f64,
    pub k2: f64,
}

impl LiquidCrystal {
    pub fn new(k1: f64, k2: f64) -> Self {
        Self { k1, k2 }
    }

    pub fn speed(&self, u: f64) -> f64 {
        let (s, c) = (sin(u), cos(u));
        sqrt(self.k1 * c * c + self.k2 * s * s)
    }

    /// `c′(u)`.
    pub fn speed_derivative(&self, u: f64) -> f64 {
        (self.k2 - self.k1) * sin(u) * cos(u) / self.speed(u)
    }
}

impl CoefficientField for LiquidCrystal {
    fn sample(&self, _x: f64, u: f64) -> CoeffSample {
        CoeffSample { alpha: 1.0, gamma: self.speed(u), gamma_u: self.speed_derivative(u), ..Default::default() }
    }

    fn bounds(&self) -> CoeffBounds {
        let lo = self.k1.min(self.k2);
        let hi = self.k1.max(self.k2);
        CoeffBounds {
            alpha1: 1.0,
            alpha2: 1.0,
            beta2: 0.0,
            gamma1: sqrt(lo),
            gamma2: sqrt(hi),
            grad_sup: fabs(self.k2 - self.k1) / (2.0 * sqrt(lo)),
        }
    }

    fn x_independent(&self) -> bool {
        true
    }
}

/// Spatially varying medium: `α = 1, β = 0, γ = γ₀ (1 + A sin(k x))`, `|A| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XHeterogeneous {
    pub gamma0: f64,
    pub amplitude: f64,
    pub wavenumber: f64,
}

impl CoefficientField for XHeterogeneous {
    fn sample(&self, x: f64, _u: f64) -> CoeffSample {
        let kx = self.wavenumber * x;
        CoeffSample {
            alpha: 1.0,
            gamma: self.gamma0 * (1.0 + self.amplitude * sin(kx)),
            gamma_x: self.gamma0 * self.amplitude * self.wavenumber * cos(kx),
            ..Default::default()
        }
    }

    fn bounds(&self) -> CoeffBounds {
        let a = fabs(self.amplitude);
        CoeffBounds {
            alpha1: 1.0,
            alpha2: 1.0,
            beta2: 0.0,
            gamma1: self.gamma0 * (1.0 - a),
            gamma2: self.gamma0 * (1.0 + a),
            grad_sup: fabs(self.gamma0 * a * self.wavenumber),
        }
    }
}

/// Wraps user-supplied closures for `α, β, γ` and differentiates them with
/// centered differences of step [`FdPartials::STEP`].
pub struct FdPartials<A, B, G> {
    pub alpha: A,
    pub beta: B,
    pub gamma: G,
    pub declared: CoeffBounds,
}

impl<A, B, G> FdPartials<A, B, G> {
    pub const STEP: f64 = 1e-5;
}

fn centered<F: Fn(f64, f64) -> f64>(f: &F, x: f64, u: f64) -> (f64, f64) {
    let h = 1e-5;
    let fx = (f(x + h, u) - f(x - h, u)) / (2.0 * h);
    let fu = (f(x, u + h) - f(x, u - h)) / (2.0 * h);
    (fx, fu)
}

impl<A, B, G> CoefficientField for FdPartials<A, B, G>
where
    A: Fn(f64, f64) -> f64 + Sync,
    B: Fn(f64, f64) -> f64 + Sync,
    G: Fn(f64, f64) -> f64 + Sync,
{
    fn sample(&self, x: f64, u: f64) -> CoeffSample {
        let (alpha_x, alpha_u) = centered(&self.alpha, x, u);
        let (beta_x, beta_u) = centered(&self.beta, x, u);
        let (gamma_x, gamma_u) = centered(&self.gamma, x, u);
        CoeffSample {
            alpha: (self.alpha)(x, u),
            beta: (self.beta)(x, u),
            gamma: (self.gamma)(x, u),
            alpha_x,
            alpha_u,
            beta_x,
            beta_u,
            gamma_x,
            gamma_u,
        }
    }

    fn bounds(&self) -> CoeffBounds {
        self.declared
    }
}

/// Tabulated fields on a tensor grid in `(x, u)`, interpolated by C¹
/// tensor-product cubic Hermite patches with centered-difference slopes.
/// Outside the table the edge values are held constant.
///
/// A table with a single `x` node is treated as `x`-independent.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    xs: Vec<f64>,
    us: Vec<f64>,
    /// Row-major `[ix * us.len() + iu]`.
    tables: [Vec<f64>; 3],
    declared: CoeffBounds,
}

impl Tabulated {
    pub fn new(
        xs: Vec<f64>,
        us: Vec<f64>,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        gamma: Vec<f64>,
        declared: CoeffBounds,
    ) -> Result<Self> {
        let n = xs.len() * us.len();
        if xs.is_empty() || us.len() < 2 {
            return Err(Error::InvalidData("tabulated field needs ≥1 x node and ≥2 u nodes"));
        }
        if alpha.len() != n || beta.len() != n || gamma.len() != n {
            return Err(Error::InvalidData("tabulated field value count mismatch"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) || us.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidData("tabulated field nodes must increase strictly"));
        }
        Ok(Self { xs, us, tables: [alpha, beta, gamma], declared })
    }

    fn value(&self, k: usize, ix: usize, iu: usize) -> f64 {
        self.tables[k][ix * self.us.len() + iu]
    }

    /// Centered (one-sided at the ends) slope of table `k` along `u` at node `(ix, iu)`.
    fn slope_u(&self, k: usize, ix: usize, iu: usize) -> f64 {
        let n = self.us.len();
        let (lo, hi) = (iu.saturating_sub(1), (iu + 1).min(n - 1));
        (self.value(k, ix, hi) - self.value(k, ix, lo)) / (self.us[hi] - self.us[lo])
    }

    fn slope_x(&self, k: usize, ix: usize, iu: usize) -> f64 {
        let n = self.xs.len();
        if n == 1 {
            return 0.0;
        }
        let (lo, hi) = (ix.saturating_sub(1), (ix + 1).min(n - 1));
        (self.value(k, hi, iu) - self.value(k, lo, iu)) / (self.xs[hi] - self.xs[lo])
    }

    fn slope_xu(&self, k: usize, ix: usize, iu: usize) -> f64 {
        let n = self.xs.len();
        if n == 1 {
            return 0.0;
        }
        let (lo, hi) = (ix.saturating_sub(1), (ix + 1).min(n - 1));
        (self.slope_u(k, hi, iu) - self.slope_u(k, lo, iu)) / (self.xs[hi] - self.xs[lo])
    }

    /// Locate the cell and local coordinate; clamps outside the table.
    fn locate(nodes: &[f64], v: f64) -> (usize, f64, f64, bool) {
        let n = nodes.len();
        if n == 1 {
            return (0, 0.0, 1.0, true);
        }
        if v <= nodes[0] {
            return (0, 0.0, nodes[1] - nodes[0], true);
        }
        if v >= nodes[n - 1] {
            return (n - 2, 1.0, nodes[n - 1] - nodes[n - 2], true);
        }
        let i = nodes.partition_point(|&z| z <= v) - 1;
        let w = nodes[i + 1] - nodes[i];
        (i, (v - nodes[i]) / w, w, false)
    }

    /// Value and partials `(f, f_x, f_u)` of table `k`.
    fn eval(&self, k: usize, x: f64, u: f64) -> (f64, f64, f64) {
        let (iu, su, wu, clamp_u) = Self::locate(&self.us, u);
        let (ix, sx, wx, clamp_x) = Self::locate(&self.xs, x);
        let hu = hermite(su);
        let hx = if self.xs.len() == 1 { [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]] } else { hermite(sx) };
        let ix1 = if self.xs.len() == 1 { 0 } else { ix + 1 };
        let corners = [(ix, iu, 0usize, 0usize), (ix, iu + 1, 0, 1), (ix1, iu, 1, 0), (ix1, iu + 1, 1, 1)];
        let (mut f, mut fx, mut fu) = (0.0, 0.0, 0.0);
        for &(cx, cu, ax, au) in &corners {
            // Basis index: value weights at [0]/[2], slope weights at [1]/[3] per end.
            let v = self.value(k, cx, cu);
            let dv_x = self.slope_x(k, cx, cu) * wx;
            let dv_u = self.slope_u(k, cx, cu) * wu;
            let dv_xu = self.slope_xu(k, cx, cu) * wx * wu;
            let (bx, dbx, gx, dgx) = (hx[2 * ax][0], hx[2 * ax][1], hx[2 * ax + 1][0], hx[2 * ax + 1][1]);
            let (bu, dbu, gu, dgu) = (hu[2 * au][0], hu[2 * au][1], hu[2 * au + 1][0], hu[2 * au + 1][1]);
            f += v * bx * bu + dv_x * gx * bu + dv_u * bx * gu + dv_xu * gx * gu;
            fx += v * dbx * bu + dv_x * dgx * bu + dv_u * dbx * gu + dv_xu * dgx * gu;
            fu += v * bx * dbu + dv_x * gx * dbu + dv_u * bx * dgu + dv_xu * gx * dgu;
        }
        fx = if clamp_x || self.xs.len() == 1 { 0.0 } else { fx / wx };
        fu = if clamp_u { 0.0 } else { fu / wu };
        (f, fx, fu)
    }
}

/// Cubic Hermite basis on [0,1]: entries `[h00, h10, h01, h11]` as `(value, d/ds)`.
fn hermite(s: f64) -> [[f64; 2]; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [
        [2.0 * s3 - 3.0 * s2 + 1.0, 6.0 * s2 - 6.0 * s],
        [s3 - 2.0 * s2 + s, 3.0 * s2 - 4.0 * s + 1.0],
        [-2.0 * s3 + 3.0 * s2, -6.0 * s2 + 6.0 * s],
        [s3 - s2, 3.0 * s2 - 2.0 * s],
    ]
}

impl CoefficientField for Tabulated {
    fn sample(&self, x: f64, u: f64) -> CoeffSample {
        let (alpha, alpha_x, alpha_u) = self.eval(0, x, u);
        let (beta, beta_x, beta_u) = self.eval(1, x, u);
        let (gamma, gamma_x, gamma_u) = self.eval(2, x, u);
        CoeffSample { alpha, beta, gamma, alpha_x, alpha_u, beta_x, beta_u, gamma_x, gamma_u }
    }

    fn bounds(&self) -> CoeffBounds {
        self.declared
    }

    fn x_independent(&self) -> bool {
        self.xs.len() == 1
    }
}

/// Characteristic speeds and signed wave speeds at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSpeeds {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Source coefficients of the Riemann-variable system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub d1: f64,
    pub d2: f64,
}

/// All pointwise quantities the semilinear system needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCoeffs {
    pub alpha: f64,
    pub alpha_x: f64,
    pub alpha_u: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub c1: f64,
    pub c2: f64,
    pub c1_x: f64,
    pub c1_u: f64,
    pub c2_x: f64,
    pub c2_u: f64,
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub d1: f64,
    pub d2: f64,
}

impl DerivedCoeffs {
    /// `c₂ − c₁ > 0`.
    #[inline]
    pub fn gap(&self) -> f64 {
        self.c2 - self.c1
    }

    pub fn wave_speeds(&self) -> WaveSpeeds {
        WaveSpeeds { lambda_minus: self.lambda_minus, lambda_plus: self.lambda_plus, c1: self.c1, c2: self.c2 }
    }

    pub fn source(&self) -> SourceCoeffs {
        SourceCoeffs { a1: self.a1, a2: self.a2, b: self.b, d1: self.d1, d2: self.d2 }
    }

    /// Energy-weight factors `(−c₁/(c₂−c₁), c₂/(c₂−c₁))` turning `R², S²` into `R̃², S̃²`.
    #[inline]
    pub fn energy_weights(&self) -> (f64, f64) {
        let g = self.gap();
        (-self.c1 / g, self.c2 / g)
    }

    /// Energy source `G` of the balance laws for `R̃²` and `S̃²`.
    pub fn energy_source(&self, r: f64, s: f64) -> f64 {
        let k = self.alpha * self.gap();
        (2.0 * self.c2 * self.a1 * r * r * s
            - 2.0 * self.c1 * self.a2 * r * s * s
            - 2.0 * self.c1 * self.c2 * self.b * r * s)
            / k
    }
}

fn check_sample(s: &CoeffSample, x: f64, u: f64) -> Result<()> {
    let ok = s.alpha > 0.0 && s.gamma > 0.0 && s.alpha.is_finite() && s.beta.is_finite() && s.gamma.is_finite();
    if ok {
        Ok(())
    } else {
        Err(Error::Domain { x, u })
    }
}

/// Roots of `α²λ² − 2βλ − γ² = 0` evaluated without cancellation.
fn speeds_of(s: &CoeffSample) -> (f64, f64, f64) {
    let root = sqrt(s.beta * s.beta + s.alpha * s.alpha * s.gamma * s.gamma);
    let a2 = s.alpha * s.alpha;
    let g2 = s.gamma * s.gamma;
    let (lm, lp) = if s.beta >= 0.0 {
        let lp = (s.beta + root) / a2;
        (-g2 / (s.beta + root), lp)
    } else {
        let lm = (s.beta - root) / a2;
        (lm, g2 / (root - s.beta))
    };
    (lm, lp, root)
}

pub fn eval_wave_speeds<F: CoefficientField + ?Sized>(field: &F, x: f64, u: f64) -> Result<WaveSpeeds> {
    let s = field.sample(x, u);
    check_sample(&s, x, u)?;
    let (lambda_minus, lambda_plus, _) = speeds_of(&s);
    Ok(WaveSpeeds { lambda_minus, lambda_plus, c1: s.alpha * lambda_minus, c2: s.alpha * lambda_plus })
}

pub fn eval_source_coeffs<F: CoefficientField + ?Sized>(field: &F, x: f64, u: f64) -> Result<SourceCoeffs> {
    derive(field, x, u).map(|d| d.source())
}

/// Evaluate every derived coefficient at `(x, u)`.
pub fn derive<F: CoefficientField + ?Sized>(field: &F, x: f64, u: f64) -> Result<DerivedCoeffs> {
    let s = field.sample(x, u);
    check_sample(&s, x, u)?;
    Ok(derive_sample(&s))
}

/// [`derive`] for an already admissible sample.
pub fn derive_sample(s: &CoeffSample) -> DerivedCoeffs {
    let (lambda_minus, lambda_plus, root) = speeds_of(s);
    let alpha = s.alpha;
    let c1 = alpha * lambda_minus;
    let c2 = alpha * lambda_plus;

    // ∂√(β²+α²γ²) by the chain rule, then ∂cᵢ with cᵢ = (β ∓ √·)/α.
    let droot = |b_z: f64, a_z: f64, g_z: f64| {
        (s.beta * b_z + alpha * s.gamma * s.gamma * a_z + alpha * alpha * s.gamma * g_z) / root
    };
    let root_x = droot(s.beta_x, s.alpha_x, s.gamma_x);
    let root_u = droot(s.beta_u, s.alpha_u, s.gamma_u);
    let c1_x = (s.beta_x - root_x) / alpha - c1 * s.alpha_x / alpha;
    let c1_u = (s.beta_u - root_u) / alpha - c1 * s.alpha_u / alpha;
    let c2_x = (s.beta_x + root_x) / alpha - c2 * s.alpha_x / alpha;
    let c2_u = (s.beta_u + root_u) / alpha - c2 * s.alpha_u / alpha;

    let gap = c2 - c1;
    let a1 = (c1 * s.alpha_u - alpha * c1_u) / (2.0 * alpha * gap);
    let a2 = (c2 * s.alpha_u - alpha * c2_u) / (2.0 * alpha * gap);
    let b = (alpha * (c1_x - c2_x) + (c1 - c2) * s.alpha_x) / (2.0 * alpha * gap);
    let common = (c2 * c1_x - c1 * c2_x) / (2.0 * gap);
    let d1 = common + (alpha * c1_x - c1 * s.alpha_x) / (2.0 * alpha);
    let d2 = common + (alpha * c2_x - c2 * s.alpha_x) / (2.0 * alpha);

    DerivedCoeffs {
        alpha,
        alpha_x: s.alpha_x,
        alpha_u: s.alpha_u,
        lambda_minus,
        lambda_plus,
        c1,
        c2,
        c1_x,
        c1_u,
        c2_x,
        c2_u,
        a1,
        a2,
        b,
        d1,
        d2,
    }
}

/// Rectangle in the `(x, u)` plane used for sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub x_min: f64,
    pub x_max: f64,
    pub u_min: f64,
    pub u_max: f64,
}

impl SampleBox {
    pub fn new(x_min: f64, x_max: f64, u_min: f64, u_max: f64) -> Self {
        Self { x_min, x_max, u_min, u_max }
    }

    fn is_empty(&self) -> bool {
        !(self.x_min <= self.x_max && self.u_min <= self.u_max)
    }

    /// Deterministic tensor grid with `n × n` points, `n = ⌈√samples⌉`, endpoints included.
    pub fn grid(&self, samples: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = {
            let mut n = 1usize;
            while n * n < samples {
                n += 1;
            }
            n
        };
        let at = move |lo: f64, hi: f64, k: usize| {
            if n == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        };
        (0..n * n).map(move |k| (at(self.x_min, self.x_max, k / n), at(self.u_min, self.u_max, k % n)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Alpha,
    Beta,
    Gamma,
    /// The point is not strictly hyperbolic (α ≤ 0 or γ ≤ 0).
    NotHyperbolic,
    SpeedBound,
    RatioBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundViolation {
    pub index: usize,
    pub x: f64,
    pub u: f64,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub samples: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub beta_abs_max: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub lambda_minus_range: (f64, f64),
    pub lambda_plus_range: (f64, f64),
    /// Observed range of `|cᵢ/(c₂−c₁)|` over both families.
    pub ratio_range: (f64, f64),
    pub n_lower: f64,
    pub n_upper: f64,
    pub m_lower: f64,
    pub m_upper: f64,
    pub violations: Vec<BoundViolation>,
}

impl BoundsReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the declared bounds of `field` against observed values on a sample grid.
pub fn validate_bounds<F: CoefficientField + ?Sized>(
    field: &F,
    domain: SampleBox,
    samples: usize,
) -> Result<BoundsReport> {
    if domain.is_empty() || samples == 0 {
        return Err(Error::EmptyDomain);
    }
    let bounds = field.bounds();
    let (n_lower, n_upper) = (bounds.n_lower(), bounds.n_upper());
    let (m_lower, m_upper) = (bounds.m_lower(), bounds.m_upper());
    let slack = 1e-12;
    let mut rep = BoundsReport {
        samples: 0,
        alpha_min: f64::INFINITY,
        alpha_max: f64::NEG_INFINITY,
        beta_abs_max: 0.0,
        gamma_min: f64::INFINITY,
        gamma_max: f64::NEG_INFINITY,
        lambda_minus_range: (f64::INFINITY, f64::NEG_INFINITY),
        lambda_plus_range: (f64::INFINITY, f64::NEG_INFINITY),
        ratio_range: (f64::INFINITY, f64::NEG_INFINITY),
        n_lower,
        n_upper,
        m_lower,
        m_upper,
        violations: Vec::new(),
    };
    let widen = |r: &mut (f64, f64), v: f64| {
        r.0 = r.0.min(v);
        r.1 = r.1.max(v);
    };
    for (index, (x, u)) in domain.grid(samples).enumerate() {
        rep.samples += 1;
        let s = field.sample(x, u);
        let mut flag = |kind| rep.violations.push(BoundViolation { index, x, u, kind });
        rep.alpha_min = rep.alpha_min.min(s.alpha);
        rep.alpha_max = rep.alpha_max.max(s.alpha);
        rep.beta_abs_max = rep.beta_abs_max.max(fabs(s.beta));
        rep.gamma_min = rep.gamma_min.min(s.gamma);
        rep.gamma_max = rep.gamma_max.max(s.gamma);
        if s.alpha < bounds.alpha1 * (1.0 - slack) || s.alpha > bounds.alpha2 * (1.0 + slack) {
            flag(ViolationKind::Alpha);
        }
        if fabs(s.beta) > bounds.beta2 * (1.0 + slack) + slack {
            flag(ViolationKind::Beta);
        }
        if s.gamma < bounds.gamma1 * (1.0 - slack) || s.gamma > bounds.gamma2 * (1.0 + slack) {
            flag(ViolationKind::Gamma);
        }
        if check_sample(&s, x, u).is_err() {
            flag(ViolationKind::NotHyperbolic);
            continue;
        }
        let (lm, lp, _) = speeds_of(&s);
        widen(&mut rep.lambda_minus_range, lm);
        widen(&mut rep.lambda_plus_range, lp);
        for l in [-lm, lp] {
            if l < n_lower * (1.0 - slack) || l > n_upper * (1.0 + slack) {
                flag(ViolationKind::SpeedBound);
            }
        }
        let gap = s.alpha * (lp - lm);
        for c in [s.alpha * lm, s.alpha * lp] {
            let r = fabs(c / gap);
            widen(&mut rep.ratio_range, r);
            if r < (1.0 / m_lower) * (1.0 - slack) || r > m_upper * (1.0 + slack) {
                flag(ViolationKind::RatioBound);
            }
        }
    }
    Ok(rep)
}

/// Smallest `Ĉ` with `|G| ≤ Ĉ (|R̃²S| + |RS̃²| + R̃² + S̃²)` guaranteed pointwise,
/// maximized over a sample grid. Writing `G` in terms of `R̃², S̃²` gives the
/// three ratios bounded here.
pub fn source_bound_constant<F: CoefficientField + ?Sized>(
    field: &F,
    domain: SampleBox,
    samples: usize,
) -> Result<f64> {
    if domain.is_empty() || samples == 0 {
        return Err(Error::EmptyDomain);
    }
    let mut c_hat: f64 = 0.0;
    for (x, u) in domain.grid(samples) {
        let d = derive(field, x, u)?;
        let k1 = fabs(2.0 * d.c2 * d.a1 / (d.alpha * d.c1));
        let k2 = fabs(2.0 * d.c1 * d.a2 / (d.alpha * d.c2));
        let k3 = fabs(d.b) * d.c2.max(-d.c1) / d.alpha;
        c_hat = c_hat.max(k1).max(k2).max(k3);
    }
    Ok(c_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn symmetric_speeds() {
        let w = eval_wave_speeds(&Constant::new(1.0, 0.0, 2.0), 0.3, -1.0).unwrap();
        assert_eq!((w.lambda_minus, w.lambda_plus, w.c1, w.c2), (-2.0, 2.0, -2.0, 2.0));
    }

    #[test]
    fn liquid_crystal_speed_at_right_angle() {
        let w = eval_wave_speeds(&LiquidCrystal::new(1.0, 4.0), 0.0, PI / 2.0).unwrap();
        assert!(close(w.lambda_plus, 2.0, 1e-15));
        assert!(close(w.lambda_minus, -2.0, 1e-15));
    }

    #[test]
    fn skewed_speeds_match_quadratic_roots() {
        let w = eval_wave_speeds(&Constant::new(2.0, 3.0, 1.0), 0.0, 0.0).unwrap();
        let sq13 = sqrt(13.0);
        assert!(close(w.lambda_minus, (3.0 - sq13) / 4.0, 1e-14));
        assert!(close(w.lambda_plus, (3.0 + sq13) / 4.0, 1e-14));
        // Independent root finder: bisection on α²λ² − 2βλ − γ².
        let q = |l: f64| 4.0 * l * l - 6.0 * l - 1.0;
        let bisect = |mut lo: f64, mut hi: f64| {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if q(lo).signum() == q(mid).signum() {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            0.5 * (lo + hi)
        };
        assert!(close(w.lambda_minus, bisect(-1.0, 0.0), 1e-14));
        assert!(close(w.lambda_plus, bisect(0.0, 3.0), 1e-14));
        assert!(close(w.lambda_minus, -0.151_387_818_865_997, 1e-9));
    }

    #[test]
    fn domain_error_for_nonpositive_gamma() {
        let f = Constant::new(1.0, 0.0, 0.0);
        assert_eq!(eval_wave_speeds(&f, 1.0, 2.0), Err(Error::Domain { x: 1.0, u: 2.0 }));
        let f = Constant::new(-1.0, 0.0, 1.0);
        assert!(derive(&f, 0.0, 0.0).is_err());
    }

    #[test]
    fn constant_field_has_no_sources() {
        let s = eval_source_coeffs(&Constant::new(1.5, -0.4, 0.8), 0.2, 0.1).unwrap();
        assert_eq!(s, SourceCoeffs { a1: 0.0, a2: 0.0, b: 0.0, d1: 0.0, d2: 0.0 });
    }

    #[test]
    fn liquid_crystal_closed_forms() {
        let f = LiquidCrystal::new(1.0, 4.0);
        for &u in &[0.1, 0.7, 2.0, -1.3] {
            let s = eval_source_coeffs(&f, 0.0, u).unwrap();
            let c = f.speed(u);
            let cp = f.speed_derivative(u);
            assert!(close(s.a1, cp / (4.0 * c), 1e-13));
            assert!(close(s.a2, -cp / (4.0 * c), 1e-13));
            assert_eq!((s.b, s.d1, s.d2), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn x_heterogeneous_closed_forms() {
        let f = XHeterogeneous { gamma0: 1.5, amplitude: 0.3, wavenumber: 2.0 };
        for &x in &[-1.0, 0.2, 0.9] {
            let s = eval_source_coeffs(&f, x, 0.4).unwrap();
            let g = f.sample(x, 0.0);
            assert!(s.a1.abs() < 1e-15 && s.a2.abs() < 1e-15);
            assert!(close(s.b, -g.gamma_x / (2.0 * g.gamma), 1e-13));
            assert!(close(s.d1, -g.gamma_x / 2.0, 1e-13));
            assert!(close(s.d2, g.gamma_x / 2.0, 1e-13));
        }
    }

    #[test]
    fn constant_bounds_are_tight() {
        let rep = validate_bounds(&Constant::new(1.0, 0.0, 1.0), SampleBox::new(-3.0, 3.0, -1.0, 1.0), 25).unwrap();
        assert!(rep.ok());
        assert_eq!(rep.lambda_plus_range, (1.0, 1.0));
        assert_eq!(rep.lambda_minus_range, (-1.0, -1.0));
        assert_eq!(rep.samples, 25);
    }

    #[test]
    fn liquid_crystal_speed_range() {
        let rep = validate_bounds(&LiquidCrystal::new(1.0, 4.0), SampleBox::new(0.0, 1.0, 0.0, 2.0 * PI), 81).unwrap();
        assert!(rep.ok(), "{:?}", rep.violations);
        assert!(close(rep.lambda_plus_range.0, 1.0, 1e-14));
        assert!(close(rep.lambda_plus_range.1, 2.0, 1e-14));
    }

    #[test]
    fn gamma_sign_change_is_flagged() {
        let f = FdPartials {
            alpha: |_x: f64, _u: f64| 1.0,
            beta: |_x: f64, _u: f64| 0.0,
            gamma: |x: f64, _u: f64| x,
            declared: CoeffBounds { alpha1: 1.0, alpha2: 1.0, beta2: 0.0, gamma1: 0.5, gamma2: 2.0, grad_sup: 1.0 },
        };
        let rep = validate_bounds(&f, SampleBox::new(-1.0, 1.0, 0.0, 0.0), 9).unwrap();
        assert!(rep.violations.iter().any(|v| v.kind == ViolationKind::NotHyperbolic && v.x <= 0.0));
        assert!(!rep.violations.iter().any(|v| v.kind == ViolationKind::NotHyperbolic && v.x > 0.0));
    }

    #[test]
    fn empty_domain_is_an_error() {
        let f = Constant::new(1.0, 0.0, 1.0);
        assert_eq!(validate_bounds(&f, SampleBox::new(1.0, 0.0, 0.0, 1.0), 4), Err(Error::EmptyDomain));
        assert_eq!(validate_bounds(&f, SampleBox::new(0.0, 1.0, 0.0, 1.0), 0), Err(Error::EmptyDomain));
    }

    #[test]
    fn tabulated_reproduces_smooth_field() {
        let lc = LiquidCrystal::new(1.0, 4.0);
        let us: Vec<f64> = (0..=200).map(|k| -1.0 + 4.0 * k as f64 / 200.0).collect();
        let g: Vec<f64> = us.iter().map(|&u| lc.speed(u)).collect();
        let ones = alloc::vec![1.0; us.len()];
        let zeros = alloc::vec![0.0; us.len()];
        let t = Tabulated::new(alloc::vec![0.0], us, ones, zeros, g, lc.bounds()).unwrap();
        assert!(t.x_independent());
        for &u in &[-0.5, 0.33, 1.0, 2.5] {
            let s = t.sample(7.0, u);
            assert!((s.gamma - lc.speed(u)).abs() < 1e-6);
            assert!((s.gamma_u - lc.speed_derivative(u)).abs() < 1e-3);
            assert_eq!(s.gamma_x, 0.0);
        }
    }

    #[test]
    fn tabulated_two_dimensional_partials() {
        let xs: Vec<f64> = (0..=40).map(|k| k as f64 / 20.0).collect();
        let us: Vec<f64> = (0..=40).map(|k| k as f64 / 20.0).collect();
        let f = |x: f64, u: f64| 1.0 + 0.2 * sin(x) * cos(u);
        let mut vals = Vec::new();
        for &x in &xs {
            for &u in &us {
                vals.push(f(x, u));
            }
        }
        let n = vals.len();
        let b = CoeffBounds { alpha1: 1.0, alpha2: 1.0, beta2: 0.0, gamma1: 0.8, gamma2: 1.2, grad_sup: 0.2 };
        let t = Tabulated::new(xs, us, alloc::vec![1.0; n], alloc::vec![0.0; n], vals, b).unwrap();
        let s = t.sample(0.77, 1.13);
        assert!((s.gamma - f(0.77, 1.13)).abs() < 1e-5);
        assert!((s.gamma_x - 0.2 * cos(0.77) * cos(1.13)).abs() < 2e-3);
        assert!((s.gamma_u + 0.2 * sin(0.77) * sin(1.13)).abs() < 2e-3);
    }

    #[test]
    fn source_constant_vanishes_for_constant_field() {
        let c = source_bound_constant(&Constant::new(1.0, 0.3, 2.0), SampleBox::new(0.0, 1.0, 0.0, 1.0), 16).unwrap();
        assert_eq!(c, 0.0);
    }
}
