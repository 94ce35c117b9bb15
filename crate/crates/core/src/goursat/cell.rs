use super::{rhs_x, rhs_y, GridNode, XRates, YRates};
use crate::coeffs::{derive, CoefficientField, DerivedCoeffs};
use crate::math::fabs;
use crate::{Error, Result};

fn x_rates(n: &GridNode, psx: [f64; 3], qez: [f64; 3], d: &DerivedCoeffs) -> XRates {
    rhs_x(&n.sided(psx, qez), d)
}

fn y_rates(n: &GridNode, psx: [f64; 3], qez: [f64; 3], d: &DerivedCoeffs) -> YRates {
    rhs_y(&n.sided(psx, qez), d)
}

#[inline]
fn qez_of(r: &XRates) -> [f64; 3] {
    [r.q, r.eta, r.zeta]
}

#[inline]
fn psx_of(r: &YRates) -> [f64; 3] {
    [r.p, r.sigma, r.xi]
}

#[inline]
fn step3(base: [f64; 3], h: f64, a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    let k = 0.5 * h;
    [base[0] + k * (a[0] + b[0]), base[1] + k * (a[1] + b[1]), base[2] + k * (a[2] + b[2])]
}

fn change(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let mut m: f64 = 0.0;
    for k in 0..3 {
        m = m.max(fabs(a[k] - b[k]) / fabs(b[k]).max(1.0));
    }
    m
}

/// Solve one lattice cell for its north-east corner.
///
/// `west` lies `dx` to the west of the unknown corner along its row and
/// `south` lies `dy` below it along its column; either may be a point of the
/// initial curve rather than a lattice node. The row equations are integrated
/// from `west`, the column equations from `south`, both by the trapezoidal
/// rule, and the implicit system is solved by fixed-point iteration. `(t, x, u)`
/// is obtained along both edges; the mean is kept and the gap stored as the
/// node's residual. `at` only labels errors.
#[allow(clippy::too_many_arguments)]
pub fn advance_cell<F: CoefficientField + ?Sized>(
    field: &F,
    west: &GridNode,
    dx: f64,
    south: &GridNode,
    dy: f64,
    tol: f64,
    max_iter: usize,
    at: (usize, usize),
) -> Result<GridNode> {
    let dw = derive(field, west.x, west.u)?;
    let ds = derive(field, south.x, south.u)?;
    let split_row = west.qez_s != west.qez_n;
    let split_col = south.psx_w != south.psx_e;

    let fw_n = x_rates(west, west.psx_e, west.qez_n, &dw);
    let fw_s = if split_row { x_rates(west, west.psx_e, west.qez_s, &dw) } else { fw_n };
    let fs_e = y_rates(south, south.psx_e, south.qez_n, &ds);
    let fs_w = if split_col { y_rates(south, south.psx_w, south.qez_n, &ds) } else { fs_e };

    let tux_w = [west.t, west.x, west.u];
    let tux_s = [south.t, south.x, south.u];
    let gw = [fw_n.t, fw_n.x, fw_n.u];
    let gs = [fs_e.t, fs_e.x, fs_e.u];

    // Explicit predictor.
    let mut p = GridNode::default();
    let pred_x = step3(tux_w, 2.0 * dx, gw, [0.0; 3]);
    let pred_y = step3(tux_s, 2.0 * dy, gs, [0.0; 3]);
    let mut tux = [0.5 * (pred_x[0] + pred_y[0]), 0.5 * (pred_x[1] + pred_y[1]), 0.5 * (pred_x[2] + pred_y[2])];
    p.qez_n = step3(west.qez_n, 2.0 * dx, qez_of(&fw_n), [0.0; 3]);
    p.qez_s = if split_row { step3(west.qez_s, 2.0 * dx, qez_of(&fw_s), [0.0; 3]) } else { p.qez_n };
    p.psx_e = step3(south.psx_e, 2.0 * dy, psx_of(&fs_e), [0.0; 3]);
    p.psx_w = if split_col { step3(south.psx_w, 2.0 * dy, psx_of(&fs_w), [0.0; 3]) } else { p.psx_e };

    let mut iterations = 0;
    let mut last_change = f64::INFINITY;
    let mut gap = 0.0;
    while iterations < max_iter {
        iterations += 1;
        p.t = tux[0];
        p.x = tux[1];
        p.u = tux[2];
        let dp = derive(field, p.x, p.u)?;

        let gp_n = x_rates(&p, p.psx_w, p.qez_n, &dp);
        let hp_e = y_rates(&p, p.psx_e, p.qez_s, &dp);

        let qez_n = step3(west.qez_n, dx, qez_of(&fw_n), qez_of(&gp_n));
        let qez_s = if split_row {
            let gp_s = x_rates(&p, p.psx_w, p.qez_s, &dp);
            step3(west.qez_s, dx, qez_of(&fw_s), qez_of(&gp_s))
        } else {
            qez_n
        };
        let psx_e = step3(south.psx_e, dy, psx_of(&fs_e), psx_of(&hp_e));
        let psx_w = if split_col {
            let hp_w = y_rates(&p, p.psx_w, p.qez_s, &dp);
            step3(south.psx_w, dy, psx_of(&fs_w), psx_of(&hp_w))
        } else {
            psx_e
        };
        let via_x = step3(tux_w, dx, gw, [gp_n.t, gp_n.x, gp_n.u]);
        let via_y = step3(tux_s, dy, gs, [hp_e.t, hp_e.x, hp_e.u]);
        let next = [0.5 * (via_x[0] + via_y[0]), 0.5 * (via_x[1] + via_y[1]), 0.5 * (via_x[2] + via_y[2])];
        gap = fabs(via_x[0] - via_y[0]).max(fabs(via_x[1] - via_y[1])).max(fabs(via_x[2] - via_y[2]));

        last_change = change(&next, &tux)
            .max(change(&qez_n, &p.qez_n))
            .max(change(&qez_s, &p.qez_s))
            .max(change(&psx_e, &p.psx_e))
            .max(change(&psx_w, &p.psx_w));
        tux = next;
        p.qez_n = qez_n;
        p.qez_s = qez_s;
        p.psx_e = psx_e;
        p.psx_w = psx_w;
        if last_change <= tol {
            break;
        }
    }
    if last_change > tol || !last_change.is_finite() {
        return Err(Error::NoConvergence { i: at.0, j: at.1, residual: last_change });
    }
    p.t = tux[0];
    p.x = tux[1];
    p.u = tux[2];
    if p.t < 0.0 {
        // Cells cut by the initial curve can land a hair below it.
        if p.t < -1e-12 * (1.0 + west.t.max(south.t)) {
            return Err(Error::DomainExit { i: at.0, j: at.1, t: p.t });
        }
        p.t = 0.0;
    }
    for v in [&mut p.psx_e, &mut p.psx_w] {
        v[0] = v[0].max(1e-14);
        v[1] = v[1].clamp(0.0, 1.0);
    }
    for v in [&mut p.qez_n, &mut p.qez_s] {
        v[0] = v[0].max(1e-14);
        v[1] = v[1].clamp(0.0, 1.0);
    }
    p.residual = gap;
    p.iterations = iterations as u32;
    Ok(p)
}
