use alloc::vec::Vec;

use super::{advance_cell, rhs_x, rhs_y, CharNode, GridNode};
use crate::coeffs::{derive, eval_wave_speeds, CoefficientField};
use crate::initdata::{compress, Boundary, InitialData, Side};
use crate::math::fabs;
use crate::{Error, Result};

/// How the lattice is truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainMode {
    /// `x`-independent fields: the outermost column and row carry the exact
    /// constant far-field state, so the curve only needs to span the support.
    Ghost,
    /// General fields: the curve is extended by the light cone of `[0, T]` and
    /// the lattice covers its domain of determinacy.
    LightCone,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub h: f64,
    pub t_final: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// `None` picks [`DomainMode::Ghost`] for `x`-independent fields.
    pub mode: Option<DomainMode>,
    /// `None` detects the orientation of the `Y` axis.
    pub orientation: Option<i8>,
    /// Safety factor on the light-cone width.
    pub cone_factor: f64,
}

impl SolveOptions {
    pub fn new(h: f64, t_final: f64) -> Self {
        Self { h, t_final, tol: 1e-12, max_iter: 60, mode: None, orientation: None, cone_factor: 1.05 }
    }
}

/// One lattice line and the point where it meets the initial curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineInfo {
    /// `X` of a column or `Ŷ` of a row.
    pub coord: f64,
    /// Initial position of the characteristic this line follows.
    pub foot: f64,
    /// The other coordinate of the crossing with the curve.
    pub cross: f64,
    /// Line issues from a breakpoint of the data.
    pub jump: bool,
    /// Boundary data at the crossing, with one-sided values on jump lines.
    pub curve: GridNode,
}

/// Geometry of the `(X, Ŷ)` lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub cols: Vec<LineInfo>,
    pub rows: Vec<LineInfo>,
    pub mode: DomainMode,
    pub orientation: i8,
    pub h: f64,
    pub t_final: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// `x`-range of the initial curve covered by the lattice.
    pub curve_range: (f64, f64),
    /// Far-field `(u, λ₋, λ₊)` to the left and right.
    pub far: [(f64, f64, f64); 2],
}

impl Lattice {
    pub fn nx(&self) -> usize {
        self.cols.len()
    }

    pub fn ny(&self) -> usize {
        self.rows.len()
    }

    /// Whether `(i, j)` lies on the `t ≥ 0` side of the curve.
    #[inline]
    pub fn in_domain(&self, i: usize, j: usize) -> bool {
        self.rows[j].foot <= self.cols[i].foot
    }

    #[inline]
    pub fn on_curve(&self, i: usize, j: usize) -> bool {
        self.rows[j].foot == self.cols[i].foot
    }

    /// First column of row `j` inside the domain.
    pub fn first_col(&self, j: usize) -> Option<usize> {
        let f = self.rows[j].foot;
        let i = self.cols.partition_point(|c| c.foot < f);
        (i < self.cols.len()).then_some(i)
    }

    /// First row of column `i` inside the domain.
    pub fn first_row(&self, i: usize) -> Option<usize> {
        let f = self.cols[i].foot;
        // Row feet decrease with j.
        let j = self.rows.partition_point(|r| r.foot > f);
        (j < self.rows.len()).then_some(j)
    }

    pub fn is_ghost(&self, i: usize, j: usize) -> bool {
        self.mode == DomainMode::Ghost && (i == 0 || j == 0)
    }

    /// Exact constant-state node on a ghost line.
    pub fn ghost(&self, i: usize, j: usize) -> GridNode {
        let xb = self.cols[i].foot;
        let yb = self.rows[j].foot;
        let (u, lm, lp) = if i == 0 { self.far[0] } else { self.far[1] };
        let t = (xb - yb) / (lp - lm);
        GridNode::from_char(&CharNode::rest(t, xb + lm * t, u))
    }
}

/// Tangential mismatch of `t` along the initial curve near `x0` when the
/// lattice `Y` axis is `s·Y`: the curve has `t ≡ 0`, so `t_X dX + t_Ŷ s dY`
/// must vanish for the correct sign.
pub fn orientation_mismatch<F: CoefficientField + ?Sized>(b: &Boundary<'_, F>, x0: f64, dx: f64, s: i8) -> Result<f64> {
    let r0 = b.record(x0)?;
    let r1 = b.record(x0 + dx)?;
    let mid = 0.5 * (x0 + x0 + dx);
    let d = derive(b.field(), mid, b.data().u0.eval(mid))?;
    let n = CharNode {
        t: 0.0,
        x: mid,
        u: 0.5 * (r0.u + r1.u),
        p: 1.0,
        q: 1.0,
        sigma: 0.5 * (r0.sigma + r1.sigma),
        eta: 0.5 * (r0.eta + r1.eta),
        xi: 0.5 * (r0.xi + r1.xi),
        zeta: 0.5 * (r0.zeta + r1.zeta),
    };
    let tx = rhs_x(&n, &d).t;
    let ty = rhs_y(&n, &d).t;
    Ok(fabs(tx * (r1.big_x - r0.big_x) + ty * f64::from(s) * (r1.big_y - r0.big_y)) / dx)
}

/// Sign `s` such that the lattice axis `s·Y` is consistent with `t = 0` on the
/// curve while `t` increases away from it. Only `s = −1` can be marched.
pub fn detect_orientation<F: CoefficientField + ?Sized>(b: &Boundary<'_, F>, x0: f64) -> Result<i8> {
    let dx = 1e-6 * (1.0 + fabs(x0));
    let minus = orientation_mismatch(b, x0, dx, -1)?;
    let plus = orientation_mismatch(b, x0, dx, 1)?;
    if minus < plus {
        Ok(-1)
    } else {
        Err(Error::InvalidOrientation)
    }
}

struct Anchor {
    coord: f64,
    foot: f64,
    jump: bool,
}

/// Piecewise-uniform axis through the anchors, about `h` apart.
fn build_axis(mut anchors: Vec<Anchor>, h: f64) -> Vec<(f64, Option<(f64, bool)>)> {
    anchors.sort_by(|a, b| a.coord.total_cmp(&b.coord));
    anchors.dedup_by(|b, a| fabs(b.coord - a.coord) <= 1e-12 * (1.0 + fabs(a.coord)));
    let mut out = Vec::new();
    for w in anchors.windows(2) {
        let len = w[1].coord - w[0].coord;
        let n = ((len / h) + 0.5).max(1.0) as usize;
        out.push((w[0].coord, Some((w[0].foot, w[0].jump))));
        for m in 1..n {
            out.push((w[0].coord + len * m as f64 / n as f64, None));
        }
    }
    if let Some(a) = anchors.last() {
        out.push((a.coord, Some((a.foot, a.jump))));
    }
    out
}

/// Boundary evaluator plus lattice: everything needed to compute any node
/// from its west and south neighbours.
pub struct Solver<'f, F: CoefficientField + ?Sized> {
    pub boundary: Boundary<'f, F>,
    pub lattice: Lattice,
}

impl<'f, F: CoefficientField + ?Sized> Solver<'f, F> {
    pub fn new(field: &'f F, data: &InitialData, opts: SolveOptions) -> Result<Self> {
        if !(opts.h > 0.0 && opts.t_final > 0.0) {
            return Err(Error::InvalidData("lattice spacing and final time must be positive"));
        }
        let boundary = Boundary::new(field, data)?;
        let (a, b) = data.support;
        let mid = 0.5 * (a + b);
        let orientation = match opts.orientation {
            None => detect_orientation(&boundary, mid)?,
            Some(s) => {
                let dx = 1e-6 * (1.0 + fabs(mid));
                let own = orientation_mismatch(&boundary, mid, dx, s)?;
                let other = orientation_mismatch(&boundary, mid, dx, -s)?;
                if s != -1 || own > other {
                    return Err(Error::InvalidOrientation);
                }
                s
            }
        };
        let mode = opts.mode.unwrap_or(if field.x_independent() { DomainMode::Ghost } else { DomainMode::LightCone });
        let h = opts.h;
        let reach = 2.0 * field.bounds().n_upper() * opts.t_final * opts.cone_factor;
        let (lo, hi, ext) = match mode {
            DomainMode::Ghost => (a - h, b + h, reach + 2.0 * h),
            DomainMode::LightCone => (a - reach - h, b + reach + h, 0.0),
        };

        let breaks: Vec<f64> = boundary.breakpoints().into_iter().filter(|&z| z > lo && z < hi).collect();
        let mut xa = Vec::new();
        let mut ya = Vec::new();
        let mut feet: Vec<(f64, bool)> = breaks.iter().map(|&z| (z, true)).collect();
        feet.push((lo, false));
        feet.push((hi, false));
        for (z, jump) in feet {
            let (bx, by) = boundary.coords(z)?;
            xa.push(Anchor { coord: bx, foot: z, jump });
            ya.push(Anchor { coord: -by, foot: z, jump });
        }
        if ext > 0.0 {
            let x_max = boundary.coords(hi)?.0 + ext;
            xa.push(Anchor { coord: x_max, foot: boundary.x_of_big_x(x_max)?, jump: false });
            let y_max = -boundary.coords(lo)?.1 + ext;
            ya.push(Anchor { coord: y_max, foot: boundary.x_of_big_y(-y_max)?, jump: false });
        }

        let curve = |x: f64| -> Result<GridNode> {
            let (u, east_north) = boundary.riemann(x, Side::Right, Side::Left)?;
            let (_, west_south) = boundary.riemann(x, Side::Left, Side::Right)?;
            let (se, xe) = compress(east_north.r, east_north.rt2);
            let (sw, xw) = compress(west_south.r, west_south.rt2);
            let (en, zn) = compress(east_north.s, east_north.st2);
            let (es, zs) = compress(west_south.s, west_south.st2);
            Ok(GridNode {
                t: 0.0,
                x,
                u,
                psx_w: [1.0, sw, xw],
                psx_e: [1.0, se, xe],
                qez_s: [1.0, es, zs],
                qez_n: [1.0, en, zn],
                residual: 0.0,
                iterations: 0,
            })
        };

        let mut cols = Vec::new();
        for (coord, anchor) in build_axis(xa, h) {
            let (foot, jump) = match anchor {
                Some(v) => v,
                None => (boundary.x_of_big_x(coord)?, false),
            };
            let cross = -boundary.coords(foot)?.1;
            cols.push(LineInfo { coord, foot, cross, jump, curve: curve(foot)? });
        }
        let mut rows = Vec::new();
        for (coord, anchor) in build_axis(ya, h) {
            let (foot, jump) = match anchor {
                Some(v) => v,
                None => (boundary.x_of_big_y(-coord)?, false),
            };
            let cross = boundary.coords(foot)?.0;
            rows.push(LineInfo { coord, foot, cross, jump, curve: curve(foot)? });
        }

        let (ul, ur) = data.far_field();
        let wl = eval_wave_speeds(field, lo, ul)?;
        let wr = eval_wave_speeds(field, hi, ur)?;
        let lattice = Lattice {
            cols,
            rows,
            mode,
            orientation,
            h,
            t_final: opts.t_final,
            tol: opts.tol,
            max_iter: opts.max_iter,
            curve_range: (lo, hi),
            far: [(ul, wl.lambda_minus, wl.lambda_plus), (ur, wr.lambda_minus, wr.lambda_plus)],
        };
        Ok(Self { boundary, lattice })
    }

    pub fn field(&self) -> &'f F {
        self.boundary.field()
    }

    /// Compute node `(i, j)` from its west and south neighbours, which the
    /// caller passes when they have been computed. Returns `None` when the
    /// node is outside the domain, a neighbour it needs is missing, or both
    /// neighbours are already past the final time.
    pub fn node(
        &self,
        i: usize,
        j: usize,
        west: Option<&GridNode>,
        south: Option<&GridNode>,
    ) -> Result<Option<GridNode>> {
        let lat = &self.lattice;
        let (c, r) = (&lat.cols[i], &lat.rows[j]);
        if !lat.in_domain(i, j) {
            return Ok(None);
        }
        if lat.on_curve(i, j) {
            return Ok(Some(if lat.is_ghost(i, j) { lat.ghost(i, j) } else { c.curve }));
        }
        if lat.is_ghost(i, j) {
            let (pred, pred_in) =
                if i == 0 { (south, j > 0 && lat.in_domain(0, j - 1)) } else { (west, lat.in_domain(i - 1, 0)) };
            if pred_in && !matches!(pred, Some(n) if n.t <= lat.t_final) {
                return Ok(None);
            }
            return Ok(Some(lat.ghost(i, j)));
        }
        let (w, dx) = if i > 0 && lat.in_domain(i - 1, j) {
            match west {
                Some(n) => (*n, c.coord - lat.cols[i - 1].coord),
                None => return Ok(None),
            }
        } else if i > 0 {
            (r.curve, c.coord - r.cross)
        } else {
            return Ok(None);
        };
        let (s, dy) = if j > 0 && lat.in_domain(i, j - 1) {
            match south {
                Some(n) => (*n, r.coord - lat.rows[j - 1].coord),
                None => return Ok(None),
            }
        } else if j > 0 {
            (c.curve, r.coord - c.cross)
        } else {
            return Ok(None);
        };
        if w.t.min(s.t) > lat.t_final {
            return Ok(None);
        }
        advance_cell(self.field(), &w, dx, &s, dy, lat.tol, lat.max_iter, (i, j)).map(Some)
    }
}
