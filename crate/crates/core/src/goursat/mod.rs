//! The semilinear system in characteristic coordinates and its lattice solver.
//!
//! The unknowns are `(t, x, u, p, q, σ, η, ξ, ζ)` as functions of the backward
//! label `X` and the lattice coordinate `Ŷ = −Y`, where `Y` is the forward
//! label. In `(X, Ŷ)` time increases along both axes and the system reads
//!
//! ```text
//! u_Ŷ = ζq/(c₂−c₁)   x_Ŷ = c₁ηq/(c₂−c₁)   t_Ŷ = αηq/(c₂−c₁)   plus p_Ŷ, σ_Ŷ, ξ_Ŷ
//! u_X = ξp/(c₂−c₁)   x_X = c₂σp/(c₂−c₁)   t_X = ασp/(c₂−c₁)   plus q_X, η_X, ζ_X
//! ```
//!
//! `(p, σ, ξ)` are carried along columns (backward characteristics) and may
//! jump across a column that issues from a breakpoint of the data; `(q, η, ζ)`
//! likewise along rows. Nodes on such lines keep both one-sided values.

mod cell;
mod lattice;
mod march;

pub use cell::advance_cell;
pub use lattice::{detect_orientation, orientation_mismatch, DomainMode, Lattice, LineInfo, SolveOptions, Solver};
pub use march::{march, solve, solve_with, CharGrid, GridRow, SolveStats};

use crate::coeffs::DerivedCoeffs;

/// The nine unknowns at one lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CharNode {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
    pub eta: f64,
    pub xi: f64,
    pub zeta: f64,
}

impl CharNode {
    /// Constant state at `(t, x)` with value `u`.
    pub fn rest(t: f64, x: f64, u: f64) -> Self {
        Self { t, x, u, p: 1.0, q: 1.0, sigma: 1.0, eta: 1.0, xi: 0.0, zeta: 0.0 }
    }
}

/// Derivatives along `Ŷ` (columns).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct YRates {
    pub u: f64,
    pub x: f64,
    pub t: f64,
    pub p: f64,
    pub sigma: f64,
    pub xi: f64,
}

/// Derivatives along `X` (rows).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct XRates {
    pub u: f64,
    pub x: f64,
    pub t: f64,
    pub q: f64,
    pub eta: f64,
    pub zeta: f64,
}

/// Right-hand sides of the `Ŷ` equations.
pub fn rhs_y(n: &CharNode, d: &DerivedCoeffs) -> YRates {
    let (c1, c2, a1, a2, b) = (d.c1, d.c2, d.a1, d.a2, d.b);
    let dd = c2 - c1;
    let al = d.alpha;
    let (p, q, s, e, xi, ze) = (n.p, n.q, n.sigma, n.eta, n.xi, n.zeta);

    let a_1 = (al * d.c1_x - c1 * d.alpha_x) / (al * dd);
    let bb = 2.0 * c1 * c2 * b / (dd * dd);
    let k_mix = 2.0 * (c1 * a2 - c2 * a1) / (c2 * dd);
    let k_a1 = 2.0 * a1 * (c1 + c2) / (c1 * dd);
    let k_a1b = 2.0 * c2 * a1 / (c1 * dd);
    let k_a2 = 2.0 * c1 * a2 / (c2 * dd);
    let skew = (c1 * d.c2_x - c2 * d.c1_x) / dd;

    let pq = p * q;
    let p_y = a_1 * pq * e * s + k_mix * xi * e * pq + k_a1 * ze * s * pq
        - k_a1b * ze * pq
        - k_a2 * xi * pq
        - bb * xi * ze * pq;
    let sigma_y = a_1 * e * s * (1.0 - s) * q
        + k_a1 * ze * s * (1.0 - s) * q
        + k_a2 * xi * s * (1.0 - e) * q
        + 2.0 * a1 / dd * xi * e * (s - 1.0) * q
        + bb * ze * xi * s * q;
    let xi_y = a1 * q / c1 * (e - s * e)
        + a2 * q / c2 * (s - s * e)
        + (a1 - a2 + 2.0 * c2 * a1 / c1) * xi * ze * q / dd
        + c2 * b / dd * s * ze * q
        + (d.d1 + skew) * e * xi * q / dd
        - a_1 * e * xi * s * q
        - k_a1 * xi * s * ze * q
        - k_mix * xi * xi * e * q
        + k_a2 * xi * xi * q
        + bb * xi * xi * ze * q;

    YRates { u: ze * q / dd, x: c1 * e * q / dd, t: al * e * q / dd, p: p_y, sigma: sigma_y, xi: xi_y }
}

/// Right-hand sides of the `X` equations.
pub fn rhs_x(n: &CharNode, d: &DerivedCoeffs) -> XRates {
    let (c1, c2, a1, a2, b) = (d.c1, d.c2, d.a1, d.a2, d.b);
    let dd = c2 - c1;
    let al = d.alpha;
    let (p, q, s, e, xi, ze) = (n.p, n.q, n.sigma, n.eta, n.xi, n.zeta);

    let a_2 = (al * d.c2_x - c2 * d.alpha_x) / (al * dd);
    let bb = 2.0 * c1 * c2 * b / (dd * dd);
    let m_mix = 2.0 * (c1 * a2 - c2 * a1) / (c1 * dd);
    let m_a2 = 2.0 * a2 * (c1 + c2) / (c2 * dd);
    let k_a1b = 2.0 * c2 * a1 / (c1 * dd);
    let k_a2 = 2.0 * c1 * a2 / (c2 * dd);
    let skew = (c1 * d.c2_x - c2 * d.c1_x) / dd;

    let pq = p * q;
    let q_x = a_2 * pq * e * s + m_mix * s * ze * pq - m_a2 * xi * e * pq
        + k_a1b * ze * pq
        + k_a2 * xi * pq
        + bb * xi * ze * pq;
    let eta_x = a_2 * e * s * (1.0 - e) * p
        + m_a2 * xi * e * (e - 1.0) * p
        + k_a1b * ze * e * (s - 1.0) * p
        + 2.0 * a2 / dd * ze * s * (1.0 - e) * p
        - bb * ze * xi * e * p;
    let zeta_x = a1 * p / c1 * (e - s * e)
        + a2 * p / c2 * (s - s * e)
        + (a1 - a2 - 2.0 * c1 * a2 / c2) * xi * ze * p / dd
        + c1 * b / dd * xi * e * p
        + (d.d2 + skew) * s * ze * p / dd
        - a_2 * e * ze * s * p
        + m_a2 * xi * e * ze * p
        - m_mix * ze * ze * s * p
        - k_a1b * ze * ze * p
        - bb * ze * ze * xi * p;

    XRates { u: xi * p / dd, x: c2 * s * p / dd, t: al * s * p / dd, q: q_x, eta: eta_x, zeta: zeta_x }
}

/// A solved lattice node: `(t, x, u)` plus both one-sided copies of the
/// column triple `(p, σ, ξ)` and the row triple `(q, η, ζ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GridNode {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    /// `(p, σ, ξ)` facing west / east.
    pub psx_w: [f64; 3],
    pub psx_e: [f64; 3],
    /// `(q, η, ζ)` facing south / north.
    pub qez_s: [f64; 3],
    pub qez_n: [f64; 3],
    /// Discrepancy between the two `(t, x, u)` updates of the cell.
    pub residual: f64,
    pub iterations: u32,
}

impl GridNode {
    pub fn from_char(n: &CharNode) -> Self {
        let psx = [n.p, n.sigma, n.xi];
        let qez = [n.q, n.eta, n.zeta];
        Self { t: n.t, x: n.x, u: n.u, psx_w: psx, psx_e: psx, qez_s: qez, qez_n: qez, residual: 0.0, iterations: 0 }
    }

    /// Node view with the east and north one-sided values.
    pub fn char_node(&self) -> CharNode {
        self.sided(self.psx_e, self.qez_n)
    }

    pub fn sided(&self, psx: [f64; 3], qez: [f64; 3]) -> CharNode {
        CharNode {
            t: self.t,
            x: self.x,
            u: self.u,
            p: psx[0],
            sigma: psx[1],
            xi: psx[2],
            q: qez[0],
            eta: qez[1],
            zeta: qez[2],
        }
    }

    /// True when the node sits on a jump line of either family.
    pub fn is_split(&self) -> bool {
        self.psx_w != self.psx_e || self.qez_s != self.qez_n
    }
}
