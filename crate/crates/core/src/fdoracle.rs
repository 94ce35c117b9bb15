//! Finite differences for the first-order system in `(R, S, u)`, valid while
//! the solution stays smooth. Used to cross-check the lattice solver.
//!
//! `R` is carried by `c₁ < 0` and `S` by `c₂ > 0`, so the upwind directions are
//! fixed: one-sided second-order differences towards `+x` for `R` and `−x` for
//! `S`, two-stage SSP Runge–Kutta in time, constant extrapolation past both ends.

use alloc::vec::Vec;

use crate::coeffs::{derive, CoefficientField};
use crate::goursat::DomainMode;
use crate::initdata::{riemann_init_sided, InitialData, Side};
use crate::math::{fabs, sqrt};
use crate::physmap::{finalize, IsoPoint, Isochrone, EPS_CONC};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FdState {
    pub t: f64,
    pub x0: f64,
    pub dx: f64,
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
}

impl FdState {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.dx * i as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// `(R̃², S̃²)` at every grid point.
    pub fn energy_densities<F: CoefficientField + ?Sized>(&self, field: &F) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut rt = Vec::with_capacity(self.len());
        let mut st = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let (wm, wp) = derive(field, self.x(i), self.u[i])?.energy_weights();
            rt.push(wm * self.r[i] * self.r[i]);
            st.push(wp * self.s[i] * self.s[i]);
        }
        Ok((rt, st))
    }

    /// `∫(R̃² + S̃²) dx` by the trapezoid rule, summed left to right.
    pub fn energy<F: CoefficientField + ?Sized>(&self, field: &F) -> Result<f64> {
        let (rt, st) = self.energy_densities(field)?;
        let mut e = 0.0;
        for i in 1..self.len() {
            e += 0.5 * self.dx * (rt[i - 1] + st[i - 1] + rt[i] + st[i]);
        }
        Ok(e)
    }

    /// Largest gap between centred `u_x` and `(R − S)/(c₂ − c₁)` at interior points.
    pub fn ux_defect<F: CoefficientField + ?Sized>(&self, field: &F) -> Result<f64> {
        let mut m: f64 = 0.0;
        for i in 1..self.len().saturating_sub(1) {
            let d = derive(field, self.x(i), self.u[i])?;
            let ux = (self.u[i + 1] - self.u[i - 1]) / (2.0 * self.dx);
            m = m.max(fabs(ux - (self.r[i] - self.s[i]) / d.gap()));
        }
        Ok(m)
    }

    /// The snapshot as an isochrone: measures by trapezoid in `x`, `p = q = 1`.
    pub fn to_isochrone<F: CoefficientField + ?Sized>(&self, field: &F, mode: DomainMode) -> Result<Isochrone> {
        let (rt, st) = self.energy_densities(field)?;
        let (mut mm, mut mp) = (0.0, 0.0);
        let mut pts = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            if i > 0 {
                mm += 0.5 * self.dx * (rt[i - 1] + rt[i]);
                mp += 0.5 * self.dx * (st[i - 1] + st[i]);
            }
            let x = self.x(i);
            let sigma = 1.0 / (1.0 + rt[i]);
            let eta = 1.0 / (1.0 + st[i]);
            let psx = [1.0, sigma, self.r[i] * sigma];
            let qez = [1.0, eta, self.s[i] * eta];
            pts.push(IsoPoint::new(x + mm, -(x + mp), x, self.u[i], [psx, psx], [qez, qez]));
        }
        let far = (mode == DomainMode::Ghost).then(|| (self.u[0], self.u[self.len() - 1]));
        Ok(finalize(self.t, pts, far, EPS_CONC, 0))
    }

    /// `u` at `x` by linear interpolation; constant beyond the ends.
    pub fn sample_u(&self, x: f64) -> f64 {
        let n = self.len();
        let k = (x - self.x0) / self.dx;
        if k <= 0.0 {
            return self.u[0];
        }
        if k >= (n - 1) as f64 {
            return self.u[n - 1];
        }
        let i = k as usize;
        let s = k - i as f64;
        self.u[i] + s * (self.u[i + 1] - self.u[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOptions {
    /// Target `λ_max dt/dx`; must not exceed `0.5`.
    pub cfl: f64,
    /// `max(|R|, |S|)` above which the run stops.
    pub blowup_cap: f64,
    /// Relative loss of the discrete energy, measured from the initial
    /// state, above which the run stops. Near a cusp `max |R|` only grows
    /// like `dx^{-1/3}`, so the cap alone is not reached at practical `dx`;
    /// the scheme instead starts shedding the energy it can no longer resolve.
    pub energy_loss: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self { cfl: 0.4, blowup_cap: 1e6, energy_loss: 1e-2 }
    }
}

struct Rates {
    u: Vec<f64>,
    r: Vec<f64>,
    s: Vec<f64>,
    speed: f64,
}

fn rates<F: CoefficientField + ?Sized>(st: &FdState, field: &F) -> Result<Rates> {
    let n = st.len();
    let (r, s) = (&st.r, &st.s);
    let at = |v: &Vec<f64>, k: isize| v[k.clamp(0, n as isize - 1) as usize];
    let mut out = Rates { u: Vec::with_capacity(n), r: Vec::with_capacity(n), s: Vec::with_capacity(n), speed: 0.0 };
    for i in 0..n {
        let k = i as isize;
        let d = derive(field, st.x(i), st.u[i])?;
        let rx = (-3.0 * at(r, k) + 4.0 * at(r, k + 1) - at(r, k + 2)) / (2.0 * st.dx);
        let sx = (3.0 * at(s, k) - 4.0 * at(s, k - 1) + at(s, k - 2)) / (2.0 * st.dx);
        let (ri, si) = (r[i], s[i]);
        let quad = d.a1 * ri * ri - (d.a1 + d.a2) * ri * si + d.a2 * si * si;
        out.r.push((-d.c1 * rx + quad + d.c2 * d.b * si - d.d1 * ri) / d.alpha);
        out.s.push((-d.c2 * sx - quad + d.c1 * d.b * ri - d.d2 * si) / d.alpha);
        out.u.push((d.c2 * si - d.c1 * ri) / (d.alpha * d.gap()));
        out.speed = out.speed.max(d.c2.max(-d.c1) / d.alpha);
    }
    Ok(out)
}

fn axpy(base: &FdState, k: &Rates, dt: f64) -> FdState {
    let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + dt * y).collect();
    FdState {
        t: base.t + dt,
        x0: base.x0,
        dx: base.dx,
        u: add(&base.u, &k.u),
        r: add(&base.r, &k.r),
        s: add(&base.s, &k.s),
    }
}

/// One SSP-RK2 step. Fails when the step violates `λ_max dt/dx ≤ 0.5`.
pub fn step<F: CoefficientField + ?Sized>(state: &FdState, field: &F, dt: f64) -> Result<FdState> {
    let k1 = rates(state, field)?;
    let cfl = k1.speed * dt / state.dx;
    if cfl > 0.5 + 1e-12 {
        return Err(Error::CflViolation { cfl });
    }
    let mid = axpy(state, &k1, dt);
    let k2 = rates(&mid, field)?;
    let end = axpy(&mid, &k2, dt);
    let avg = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
    Ok(FdState {
        t: state.t + dt,
        x0: state.x0,
        dx: state.dx,
        u: avg(&state.u, &end.u),
        r: avg(&state.r, &end.r),
        s: avg(&state.s, &end.s),
    })
}

/// Initial state on a uniform grid aligned with the left end of the support
/// and padded by `1.05·N̄·T` plus a few cells on each side. Grid points on a
/// breakpoint of the data take the mean of the one-sided `R`, `S`.
pub fn initial_state<F: CoefficientField + ?Sized>(
    field: &F,
    data: &InitialData,
    t_final: f64,
    dx: f64,
) -> Result<FdState> {
    if !(dx > 0.0) || !(t_final >= 0.0) {
        return Err(Error::InvalidData("dx must be positive and T nonnegative"));
    }
    let (a, b) = data.support;
    let pad = libm::ceil(1.05 * field.bounds().n_upper() * t_final / dx) as usize + 4;
    let x0 = a - pad as f64 * dx;
    let n = libm::ceil((b - a) / dx) as usize + 2 * pad + 1;
    let mut st =
        FdState { t: 0.0, x0, dx, u: Vec::with_capacity(n), r: Vec::with_capacity(n), s: Vec::with_capacity(n) };
    for i in 0..n {
        let x = st.x(i);
        let l = riemann_init_sided(field, data, x, Side::Left)?;
        let r = riemann_init_sided(field, data, x, Side::Right)?;
        st.u.push(data.u0.eval(x));
        st.r.push(0.5 * (l.r + r.r));
        st.s.push(0.5 * (l.s + r.s));
    }
    Ok(st)
}

fn max_gradient(st: &FdState) -> f64 {
    st.r.iter().chain(&st.s).fold(0.0f64, |m, v| if v.is_finite() { m.max(fabs(*v)) } else { f64::INFINITY })
}

/// Advance from `data` to each of `times` (sorted, nonnegative), returning one
/// snapshot per time. Steps are shortened to land on the snapshot times.
pub fn run<F: CoefficientField + ?Sized>(
    field: &F,
    data: &InitialData,
    times: &[f64],
    dx: f64,
    opts: FdOptions,
) -> Result<Vec<FdState>> {
    let t_final = times.iter().copied().fold(0.0, f64::max);
    let mut st = initial_state(field, data, t_final, dx)?;
    let dt_max = opts.cfl * dx / field.bounds().n_upper();
    let e_start = st.energy(field)?;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < st.t {
            return Err(Error::InvalidData("snapshot times must be sorted"));
        }
        let steps = libm::ceil((target - st.t) / dt_max - 1e-9) as usize;
        let start = st.t;
        for k in 1..=steps {
            let next = if k == steps { target } else { start + (target - start) * k as f64 / steps as f64 };
            st = step(&st, field, next - st.t)?;
            st.t = next;
            let g = max_gradient(&st);
            let lost = if e_start > 0.0 { (e_start - st.energy(field)?) / e_start } else { 0.0 };
            if g > opts.blowup_cap || lost > opts.energy_loss {
                return Err(Error::BlowupSuspected { t: st.t, max_gradient: g });
            }
        }
        out.push(st.clone());
    }
    Ok(out)
}

/// Time of the step at which `run` first reports blowup, if before `t_max`.
pub fn blowup_time<F: CoefficientField + ?Sized>(
    field: &F,
    data: &InitialData,
    dx: f64,
    t_max: f64,
    opts: FdOptions,
) -> Result<Option<f64>> {
    match run(field, data, &[t_max], dx, opts) {
        Ok(_) => Ok(None),
        Err(Error::BlowupSuspected { t, .. }) => Ok(Some(t)),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareRow {
    pub t: f64,
    pub linf_u: f64,
    pub l2_u: f64,
    /// `‖u_grid − u_fd‖₂ / ‖u_fd‖₂`.
    pub rel_l2_u: f64,
    pub linf_r: f64,
    pub linf_s: f64,
}

/// Errors between oracle snapshots and isochrones of the lattice solution at
/// the same times, sampled on the oracle grid. Points where the lattice
/// solution is concentrated are skipped for `R` and `S`.
pub fn compare(states: &[FdState], isos: &[Isochrone]) -> Result<Vec<CompareRow>> {
    let mut rows = Vec::with_capacity(states.len());
    for st in states {
        let iso = isos.iter().find(|i| fabs(i.t_star - st.t) <= 1e-12).ok_or(Error::WindowMismatch)?;
        let (mut linf, mut l2, mut norm, mut lr, mut ls) = (0.0f64, 0.0, 0.0, 0.0f64, 0.0f64);
        for i in 0..st.len() {
            let x = st.x(i);
            let u = iso.sample_u(x).map_err(|_| Error::WindowMismatch)?;
            let e = fabs(u - st.u[i]);
            linf = linf.max(e);
            l2 += e * e * st.dx;
            norm += st.u[i] * st.u[i] * st.dx;
            if let Some((r, s)) = iso.sample_riemann(x).map_err(|_| Error::WindowMismatch)? {
                lr = lr.max(fabs(r - st.r[i]));
                ls = ls.max(fabs(s - st.s[i]));
            }
        }
        let l2 = sqrt(l2);
        let rel = if norm > 0.0 { l2 / sqrt(norm) } else { l2 };
        rows.push(CompareRow { t: st.t, linf_u: linf, l2_u: l2, rel_l2_u: rel, linf_r: lr, linf_s: ls });
    }
    Ok(rows)
}
