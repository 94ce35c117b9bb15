//! Checks the closed-form right-hand sides of the characteristic system against
//! an oracle built only from the Riemann-variable equations: σ, ξ, η, ζ are
//! differentiated along characteristics by the chain rule, and p_Ŷ, q_X are
//! recovered from the compatibility conditions x_XŶ = x_ŶX, t_XŶ = t_ŶX.
//! Every partial derivative in the oracle is a centered finite difference.

use conswave_core::coeffs::{
    derive, eval_wave_speeds, CoeffBounds, CoeffSample, CoefficientField, LiquidCrystal, XHeterogeneous,
};
use conswave_core::goursat::{rhs_x, rhs_y, CharNode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A field where all three coefficients depend on both x and u.
struct Mixed;

impl CoefficientField for Mixed {
    fn sample(&self, x: f64, u: f64) -> CoeffSample {
        let s = (x + u).sin();
        let c = (x + u).cos();
        let b = (2.0 * x - u).cos();
        let bs = (2.0 * x - u).sin();
        CoeffSample {
            alpha: 1.0 + 0.15 * s,
            alpha_x: 0.15 * c,
            alpha_u: 0.15 * c,
            beta: 0.4 * b,
            beta_x: -0.8 * bs,
            beta_u: 0.4 * bs,
            gamma: 1.2 + 0.3 * u.sin() * x.cos(),
            gamma_x: -0.3 * u.sin() * x.sin(),
            gamma_u: 0.3 * u.cos() * x.cos(),
        }
    }

    fn bounds(&self) -> CoeffBounds {
        CoeffBounds { alpha1: 0.85, alpha2: 1.15, beta2: 0.4, gamma1: 0.9, gamma2: 1.5, grad_sup: 1.0 }
    }
}

const H: f64 = 1e-5;

fn speeds<F: CoefficientField>(f: &F, x: f64, u: f64) -> (f64, f64, f64) {
    let w = eval_wave_speeds(f, x, u).unwrap();
    (f.sample(x, u).alpha, w.c1, w.c2)
}

fn d_dx<G: Fn(f64, f64) -> f64>(g: &G, x: f64, u: f64) -> f64 {
    (g(x + H, u) - g(x - H, u)) / (2.0 * H)
}

fn d_du<G: Fn(f64, f64) -> f64>(g: &G, x: f64, u: f64) -> f64 {
    (g(x, u + H) - g(x, u - H)) / (2.0 * H)
}

struct Oracle {
    y: [f64; 3],
    x: [f64; 3],
    p_y: f64,
    q_x: f64,
}

fn oracle<F: CoefficientField>(f: &F, x: f64, u: f64, r: f64, s: f64, p: f64, q: f64) -> Oracle {
    let al = |x: f64, u: f64| speeds(f, x, u).0;
    let c1 = |x: f64, u: f64| speeds(f, x, u).1;
    let c2 = |x: f64, u: f64| speeds(f, x, u).2;
    let (a, k1, k2) = speeds(f, x, u);
    let dd = k2 - k1;
    let (ax, au) = (d_dx(&al, x, u), d_du(&al, x, u));
    let (c1x, c1u) = (d_dx(&c1, x, u), d_du(&c1, x, u));
    let (c2x, c2u) = (d_dx(&c2, x, u), d_du(&c2, x, u));
    let a1 = (k1 * au - a * c1u) / (2.0 * a * dd);
    let a2 = (k2 * au - a * c2u) / (2.0 * a * dd);
    let b = (a * (c1x - c2x) + (k1 - k2) * ax) / (2.0 * a * dd);
    let common = (k2 * c1x - k1 * c2x) / (2.0 * dd);
    let d1 = common + (a * c1x - k1 * ax) / (2.0 * a);
    let d2 = common + (a * c2x - k2 * ax) / (2.0 * a);
    let lm_r = a1 * r * r - (a1 + a2) * r * s + a2 * s * s + k2 * b * s - d1 * r;
    let lp_s = -a1 * r * r + (a1 + a2) * r * s - a2 * s * s + k1 * b * r - d2 * s;

    // Functions of (x, u, R) and (x, u, S).
    let sig = |x: f64, u: f64, r: f64| {
        let (_, c1, c2) = speeds(f, x, u);
        1.0 / (1.0 - c1 / (c2 - c1) * r * r)
    };
    let eta = |x: f64, u: f64, s: f64| {
        let (_, c1, c2) = speeds(f, x, u);
        1.0 / (1.0 + c2 / (c2 - c1) * s * s)
    };
    // L₋ g = c₁ g_x + S g_u + g_R L₋R, L₊ k = c₂ k_x + R k_u + k_S L₊S.
    let l_minus = |g: &dyn Fn(f64, f64, f64) -> f64| {
        k1 * (g(x + H, u, r) - g(x - H, u, r)) / (2.0 * H)
            + s * (g(x, u + H, r) - g(x, u - H, r)) / (2.0 * H)
            + lm_r * (g(x, u, r + H) - g(x, u, r - H)) / (2.0 * H)
    };
    let l_plus = |k: &dyn Fn(f64, f64, f64) -> f64| {
        k2 * (k(x + H, u, s) - k(x - H, u, s)) / (2.0 * H)
            + r * (k(x, u + H, s) - k(x, u - H, s)) / (2.0 * H)
            + lp_s * (k(x, u, s + H) - k(x, u, s - H)) / (2.0 * H)
    };
    let sg = sig(x, u, r);
    let et = eta(x, u, s);
    let along_y = et * q / dd;
    let along_x = sg * p / dd;

    let sigma_y = along_y * l_minus(&sig);
    let xi_y = along_y * l_minus(&|x, u, r| r * sig(x, u, r));
    let eta_x = along_x * l_plus(&eta);
    let zeta_x = along_x * l_plus(&|x, u, s| s * eta(x, u, s));

    // x_X = g p, x_Ŷ = k q and t_X = g' p, t_Ŷ = k' q.
    let g = |x: f64, u: f64, r: f64| {
        let (_, c1, c2) = speeds(f, x, u);
        c2 * sig(x, u, r) / (c2 - c1)
    };
    let k = |x: f64, u: f64, s: f64| {
        let (_, c1, c2) = speeds(f, x, u);
        c1 * eta(x, u, s) / (c2 - c1)
    };
    let gt = |x: f64, u: f64, r: f64| {
        let (a, c1, c2) = speeds(f, x, u);
        a * sig(x, u, r) / (c2 - c1)
    };
    let kt = |x: f64, u: f64, s: f64| {
        let (a, c1, c2) = speeds(f, x, u);
        a * eta(x, u, s) / (c2 - c1)
    };
    // g p_Ŷ − k q_X = along_x·L₊k·q − along_y·L₋g·p, and the same with g', k'.
    let m = [[g(x, u, r), -k(x, u, s)], [gt(x, u, r), -kt(x, u, s)]];
    let rhs =
        [along_x * l_plus(&k) * q - along_y * l_minus(&g) * p, along_x * l_plus(&kt) * q - along_y * l_minus(&gt) * p];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let p_y = (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det;
    let q_x = (m[0][0] * rhs[1] - rhs[0] * m[1][0]) / det;

    Oracle { y: [sigma_y, xi_y, 0.0], x: [eta_x, zeta_x, 0.0], p_y, q_x }
}

fn check<F: CoefficientField>(f: &F, name: &str, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..200 {
        let x = rng.gen_range(-2.0..2.0);
        let u = rng.gen_range(-2.0..2.0);
        let r = rng.gen_range(-2.0..2.0);
        let s = rng.gen_range(-2.0..2.0);
        let p = rng.gen_range(0.5..2.0);
        let q = rng.gen_range(0.5..2.0);
        let d = derive(f, x, u).unwrap();
        let (wr, ws) = d.energy_weights();
        let sigma = 1.0 / (1.0 + wr * r * r);
        let eta = 1.0 / (1.0 + ws * s * s);
        let n = CharNode { t: 0.3, x, u, p, q, sigma, eta, xi: r * sigma, zeta: s * eta };
        let o = oracle(f, x, u, r, s, p, q);
        let ry = rhs_y(&n, &d);
        let rx = rhs_x(&n, &d);
        let pairs = [
            ("sigma_Y", ry.sigma, o.y[0]),
            ("xi_Y", ry.xi, o.y[1]),
            ("p_Y", ry.p, o.p_y),
            ("eta_X", rx.eta, o.x[0]),
            ("zeta_X", rx.zeta, o.x[1]),
            ("q_X", rx.q, o.q_x),
        ];
        for (what, got, want) in pairs {
            assert!(
                (got - want).abs() <= 1e-6 * (1.0 + want.abs()),
                "{name} {what} at x={x} u={u} R={r} S={s}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn liquid_crystal_rates_match_oracle() {
    check(&LiquidCrystal::new(1.0, 4.0), "liquid-crystal", 1);
}

#[test]
fn x_heterogeneous_rates_match_oracle() {
    check(&XHeterogeneous { gamma0: 1.0, amplitude: 0.4, wavenumber: 2.0 }, "x-heterogeneous", 2);
}

#[test]
fn mixed_field_rates_match_oracle() {
    check(&Mixed, "mixed", 3);
}
