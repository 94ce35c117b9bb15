//! Small numeric helpers shared across modules.

pub use libm::{cos, exp, fabs, log, pow, sin, sqrt, tanh};

/// 8-point Gauss–Legendre abscissae on [-1, 1] (positive half).
const GL8_X: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL8_W: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// Composite 8-point Gauss–Legendre quadrature of `f` over `[a, b]` split
/// into `pieces` equal panels. Exact for polynomials of degree ≤ 15 per panel.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, pieces: usize) -> f64 {
    if b == a {
        return 0.0;
    }
    let pieces = pieces.max(1);
    let w = (b - a) / pieces as f64;
    let mut total = 0.0;
    for k in 0..pieces {
        let lo = a + w * k as f64;
        let mid = lo + 0.5 * w;
        let half = 0.5 * w;
        let mut s = 0.0;
        for (xi, wi) in GL8_X.iter().zip(GL8_W.iter()) {
            s += wi * (f(mid - half * xi) + f(mid + half * xi));
        }
        total += s * half;
    }
    total
}

#[inline]
pub fn lerp(a: f64, b: f64, s: f64) -> f64 {
    a + (b - a) * s
}

#[inline]
pub fn lerp3(a: [f64; 3], b: [f64; 3], s: f64) -> [f64; 3] {
    [lerp(a[0], b[0], s), lerp(a[1], b[1], s), lerp(a[2], b[2], s)]
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Observed convergence order from errors at successive halvings of the step.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    log(coarse / fine) / core::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_degree_fifteen_exactly() {
        let v = gauss_legendre(|x| pow(x, 15.0) + 3.0 * x * x, 0.0, 2.0, 1);
        let exact = pow(2.0, 16.0) / 16.0 + 8.0;
        assert!((v - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn gauss_legendre_smooth_integrand() {
        let v = gauss_legendre(sin, 0.0, core::f64::consts::PI, 4);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn slope_of_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        assert!((ls_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-15);
    }
}
