//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use conswave::config::RunConfig;
use conswave::presets::{build_data, build_field, Field};
use conswave::{run, solve_parallel};
use conswave_core::chartrace::{
    compare_with_gridline, trace_characteristic, trace_times, CharPath, Family, Slices, Source,
};
use conswave_core::coeffs::{
    derive, eval_source_coeffs, eval_wave_speeds, source_bound_constant, CoefficientField, LiquidCrystal, SampleBox,
};
use conswave_core::diagnostics::{
    interaction_bound, modulus_of_continuity, total_energy, ConcentrationCollector, ConcentrationEvent,
    InteractionCollector,
};
use conswave_core::fdoracle::{self, blowup_time, FdOptions};
use conswave_core::goursat::{march, solve, solve_with, GridNode, GridRow, Lattice, SolveOptions, Solver};
use conswave_core::initdata::{total_initial_energy, InitialData};
use conswave_core::math::observed_order;
use conswave_core::physmap::{curve_isochrone, extract_isochrones, jacobian_det, IsoCollector, Isochrone, EPS_CONC};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

/// Results shared between criteria so the large solves run once.
#[derive(Default)]
struct Shared {
    /// `(max Q, E₀)` per sampled run.
    q: Vec<(&'static str, f64, f64)>,
    /// `(space-time interaction, bound)` per run.
    interaction: Vec<(&'static str, f64, f64)>,
    /// Traced paths with the `(N̲, N̄)` of their field.
    paths: Vec<(&'static str, CharPath, f64, f64)>,
}

fn preset(scenario: &str, data: &str) -> (Field, InitialData) {
    let mut c = RunConfig::default();
    c.scenario.preset = scenario.into();
    c.data.preset = data.into();
    let e = c.effective().unwrap();
    (build_field(&e.scenario).unwrap(), build_data(&e.data).unwrap())
}

fn custom_field(dir: &Path) -> Field {
    let xs: Vec<f64> = (0..=12).map(|k| -3.0 + 0.5 * k as f64).collect();
    let us: Vec<f64> = (0..=16).map(|k| -4.0 + 0.5 * k as f64).collect();
    let (mut a, mut b, mut g) = (Vec::new(), Vec::new(), Vec::new());
    for &x in &xs {
        for &u in &us {
            a.push(1.0 + 0.2 * f64::sin(x) * f64::cos(u));
            b.push(0.3 * f64::sin(x + u));
            g.push(1.2 + 0.3 * f64::cos(2.0 * u) * f64::sin(0.5 * x));
        }
    }
    let table = serde_json::json!({
        "xs": xs, "us": us, "alpha": a, "beta": b, "gamma": g,
        "bounds": {"alpha1": 0.75, "alpha2": 1.25, "beta2": 0.35, "gamma1": 0.85, "gamma2": 1.55, "grad_sup": 2.0},
    });
    let path = dir.join("table.json");
    fs::write(&path, table.to_string()).unwrap();
    let mut c = RunConfig::default();
    c.scenario.preset = "custom".into();
    c.scenario.table = Some(path);
    build_field(&c.effective().unwrap().scenario).unwrap()
}

fn all_fields(dir: &Path) -> Vec<(&'static str, Field)> {
    vec![
        ("linear", preset("linear", "pulse").0),
        ("liquid-crystal", preset("liquid-crystal", "pulse").0),
        ("x-heterogeneous", preset("x-heterogeneous", "pulse").0),
        ("custom", custom_field(dir)),
    ]
}

fn min_order(errs: &[f64]) -> f64 {
    errs.windows(2).map(|w| observed_order(w[0], w[1])).fold(f64::INFINITY, f64::min)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ")
}

/// Same sample region as the run pipeline uses for `Ĉ`.
fn sample_box<F: CoefficientField + ?Sized>(field: &F, data: &InitialData, t_final: f64) -> SampleBox {
    let reach = field.bounds().n_upper() * t_final + 1.0;
    let (a, b) = data.support;
    let u1 = data.u1.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (lo, hi) = data.u0.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |r, &v| (r.0.min(v), r.1.max(v)));
    let m = 1.0 + t_final * u1;
    SampleBox::new(a - reach, b + reach, lo - m, hi + m)
}

struct Sweep {
    lattice: Lattice,
    isos: Vec<Isochrone>,
    events: Vec<ConcentrationEvent>,
    interaction: f64,
}

/// Stream the lattice once, keeping isochrones at `times` plus the curve.
fn sweep<F: CoefficientField + ?Sized>(field: &F, data: &InitialData, h: f64, t_final: f64, times: &[f64]) -> Sweep {
    let solver = Solver::new(field, data, SolveOptions::new(h, t_final)).unwrap();
    let lat = &solver.lattice;
    let mut iso = IsoCollector::new(times);
    let mut conc = ConcentrationCollector::new(EPS_CONC);
    let mut inter = InteractionCollector::new(t_final);
    let xs: Vec<f64> = lat.cols.iter().map(|c| c.coord).collect();
    let ys: Vec<f64> = lat.rows.iter().map(|r| r.coord).collect();
    march(&solver, |j, p, c| {
        iso.visit(lat, j, p, c);
        conc.visit(lat, j, c);
        inter.visit(field, lat, &ys, &xs, j, c)
    })
    .unwrap();
    let mut isos = vec![curve_isochrone(lat, EPS_CONC)];
    isos.extend(iso.finish(lat, EPS_CONC).unwrap());
    Sweep { lattice: lat.clone(), isos, events: conc.finish(), interaction: inter.total }
}

fn nearest_foot(lat: &Lattice, family: Family, y: f64) -> f64 {
    let feet = match family {
        Family::Backward => lat.cols.iter().map(|c| c.foot).collect::<Vec<_>>(),
        Family::Forward => lat.rows.iter().map(|r| r.foot).collect(),
    };
    feet.into_iter().min_by(|a, b| (a - y).abs().total_cmp(&(b - y).abs())).unwrap()
}

fn c1_eigenvalues(_: &mut Shared) -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let fields = all_fields(dir.path());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut signs) = (0.0f64, true);
    for (_, f) in &fields {
        for _ in 0..100_000 {
            let (x, u) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let s = f.sample(x, u);
            let w = eval_wave_speeds(f.as_ref(), x, u).unwrap();
            signs &= w.lambda_minus < 0.0 && 0.0 < w.lambda_plus;
            for l in [w.lambda_minus, w.lambda_plus] {
                let terms = [s.alpha * s.alpha * l * l, 2.0 * s.beta * l, s.gamma * s.gamma];
                let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
                worst = worst.max((terms[0] - terms[1] - terms[2]).abs() / scale);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Verdict {
        pass: worst <= 1e-12 && signs && secs < 1.0,
        detail: format!(
            "4 x 1e5 samples, max rel residual {worst:.2e} (tol 1e-12), sign order {signs}, {secs:.2} s (< 1 s)"
        ),
    }
}

fn c2_source_coefficients(_: &mut Shared) -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let fields = all_fields(dir.path());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let step = 1e-7;
    let mut worst = 0.0f64;
    for (_, f) in &fields {
        let c = |x: f64, u: f64| {
            let w = eval_wave_speeds(f.as_ref(), x, u).unwrap();
            (w.c1, w.c2)
        };
        for _ in 0..2_500 {
            let (x, u) = (rng.gen_range(-2.9..2.9), rng.gen_range(-3.9..3.9));
            let s = f.sample(x, u);
            let (c1, c2) = c(x, u);
            let diff = |pa: (f64, f64), pb: (f64, f64)| ((pa.0 - pb.0) / (2.0 * step), (pa.1 - pb.1) / (2.0 * step));
            let (c1_x, c2_x) = diff(c(x + step, u), c(x - step, u));
            let (c1_u, c2_u) = diff(c(x, u + step), c(x, u - step));
            let (al, gap) = (s.alpha, c2 - c1);
            let common = (c2 * c1_x - c1 * c2_x) / (2.0 * gap);
            let want = [
                (c1 * s.alpha_u - al * c1_u) / (2.0 * al * gap),
                (c2 * s.alpha_u - al * c2_u) / (2.0 * al * gap),
                (al * (c1_x - c2_x) + (c1 - c2) * s.alpha_x) / (2.0 * al * gap),
                common + (al * c1_x - c1 * s.alpha_x) / (2.0 * al),
                common + (al * c2_x - c2 * s.alpha_x) / (2.0 * al),
            ];
            let g = eval_source_coeffs(f.as_ref(), x, u).unwrap();
            for (got, w) in [g.a1, g.a2, g.b, g.d1, g.d2].into_iter().zip(want) {
                worst = worst.max((got - w).abs() / w.abs().max(1.0));
            }
        }
    }
    let mut closed = 0.0f64;
    for (k1, k2) in [(1.0, 4.0), (2.0, 0.5), (1.0, 1.5)] {
        let lc = LiquidCrystal::new(k1, k2);
        for _ in 0..2_000 {
            let u = rng.gen_range(-10.0..10.0);
            let g = eval_source_coeffs(&lc, 0.0, u).unwrap();
            let r = lc.speed_derivative(u) / (4.0 * lc.speed(u));
            closed = closed.max((g.a1 - r).abs() / r.abs().max(1.0)).max((g.a2 + r).abs() / r.abs().max(1.0));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Verdict {
        pass: worst <= 1e-6 && closed <= 1e-10 && secs < 1.0,
        detail: format!(
            "vs differenced speeds {worst:.2e} (tol 1e-6), closed form {closed:.2e} (tol 1e-10), {secs:.2} s (< 1 s)"
        ),
    }
}

fn dalembert_pulse(t: f64, x: f64) -> f64 {
    let lo = (x - t).max(0.0);
    let hi = (x + t).min(1.0);
    0.5 * (hi - lo).max(0.0)
}

fn c3_linear_exactness(_: &mut Shared) -> Verdict {
    let (f, d) = preset("linear", "pulse");
    let hs = [1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0];
    let mut errs = Vec::new();
    let mut finest_secs = 0.0;
    for &h in &hs {
        let start = Instant::now();
        let solver = Solver::new(f.as_ref(), &d, SolveOptions::new(h, 1.0)).unwrap();
        let lat = &solver.lattice;
        let mut err = 0.0f64;
        march(&solver, |j, _, cur| {
            for (i, n) in cur.iter() {
                if n.t <= 1.0 && !lat.is_ghost(i, j) {
                    err = err.max((n.u - dalembert_pulse(n.t, n.x)).abs());
                }
            }
            Ok(())
        })
        .unwrap();
        finest_secs = start.elapsed().as_secs_f64();
        errs.push(err);
    }
    let bounded = errs.iter().zip(&hs).all(|(e, h)| *e <= 5.0 * h * h);
    let order = min_order(&errs);
    // Errors at the rounding floor carry no order information.
    let exact = errs.iter().all(|&e| e <= 1e-12);
    let pass = bounded && (order >= 1.8 || exact) && finest_secs < 30.0;
    Verdict {
        pass,
        detail: format!(
            "Linf {} vs 5h^2, order {order:.2} (>= 1.8){}, finest {finest_secs:.1} s (< 30 s)",
            fmt_list(&errs),
            if exact { ", errors at rounding level" } else { "" }
        ),
    }
}

fn c4_conservation(shared: &mut Shared) -> Verdict {
    let start = Instant::now();
    let (f, d) = preset("liquid-crystal", "hat-steep");
    let t_final = 0.8;
    let e0 = total_initial_energy(f.as_ref(), &d).unwrap();
    let samples: Vec<f64> = (1..=16).map(|k| t_final * k as f64 / 16.0).collect();
    let dt = 1.0 / 64.0;
    let tr = trace_times(t_final, dt);
    let hs = [1.0 / 256.0, 1.0 / 512.0, 1.0 / 1024.0];
    let mut drifts = Vec::new();
    let mut finite = true;
    let mut finest = None;
    for (k, &h) in hs.iter().enumerate() {
        let mut times = samples.clone();
        if k == 0 {
            times.extend(tr.iter().copied().filter(|&t| t > 0.0));
            times.sort_by(f64::total_cmp);
            times.dedup();
        }
        let s = sweep(f.as_ref(), &d, h, t_final, &times);
        let on_samples = |i: &&Isochrone| i.t_star == 0.0 || samples.contains(&i.t_star);
        drifts.push(s.isos.iter().filter(on_samples).map(|i| total_energy(i, e0).rel_drift.abs()).fold(0.0, f64::max));
        finite &= s.isos.iter().all(|i| i.points.iter().all(|p| p.u.is_finite()));
        let q = s.isos.iter().map(|i| total_energy(i, e0).q).fold(0.0, f64::max);
        shared.q.push(("hat-steep", q, e0));
        if k == 0 {
            let slices = Slices::new(s.isos, Source::Grid);
            for y in [-0.1, 0.0, 0.1] {
                for family in [Family::Backward, Family::Forward] {
                    let foot = nearest_foot(&s.lattice, family, y);
                    let p = trace_characteristic(&slices, f.as_ref(), family, foot, t_final, dt).unwrap();
                    let b = f.bounds();
                    shared.paths.push(("hat-steep through concentration", p, b.n_lower(), b.n_upper()));
                }
            }
        } else if k + 1 == hs.len() {
            finest = Some(s);
        }
    }
    let s = finest.unwrap();
    let b = f.bounds();
    let c_hat = source_bound_constant(f.as_ref(), sample_box(f.as_ref(), &d, t_final), 4096).unwrap();
    let bound = interaction_bound(b.alpha2, b.gamma1, b.m_lower(), c_hat, e0, t_final);
    shared.interaction.push(("hat-steep h=1/1024", s.interaction, bound));

    // Hölder check on the slices after the first concentration.
    let onset = s.events.iter().map(|e| e.t_range.0).fold(f64::INFINITY, f64::min);
    let (x_lo, x_hi) =
        s.events.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |r, e| (r.0.min(e.x_range.0), r.1.max(e.x_range.1)));
    let deltas: Vec<f64> = (3..=10).map(|k| 0.5f64.powi(k)).collect();
    let mut holder_ok = !s.events.is_empty();
    let mut worst_ratio = 0.0f64;
    let mut windows = 0;
    for iso in s.isos.iter().filter(|i| i.t_star >= onset) {
        let m = modulus_of_continuity(iso, x_lo - 0.05, x_hi + 0.05, 2001, &deltas);
        let Ok(m) = m else {
            holder_ok = false;
            continue;
        };
        windows += 1;
        let c = m[0].1 / m[0].0.powf(0.4);
        for &(dl, w) in &m {
            worst_ratio = worst_ratio.max(w / (c * dl.powf(0.4)));
        }
    }
    holder_ok &= windows > 0 && worst_ratio <= 1.0;
    let order = min_order(&drifts);
    let secs = start.elapsed().as_secs_f64();
    let pass = drifts[2] <= 1e-3 && order >= 1.8 && !s.events.is_empty() && finite && holder_ok && secs < 300.0;
    Verdict {
        pass,
        detail: format!(
            "max drift {} at h=1/256,1/512,1/1024 (tol 1e-3), order {order:.2} (>= 1.8), {} events from t={onset:.3}, \
             u finite {finite}, modulus/(C d^0.4) <= {worst_ratio:.3} on {windows} slices, {secs:.0} s (< 300 s)",
            fmt_list(&drifts),
            s.events.len()
        ),
    }
}

fn c5_oracle(shared: &mut Shared) -> Verdict {
    let start = Instant::now();
    let (f, d) = preset("liquid-crystal", "gauss-like");
    let opts = FdOptions::default();
    let tb = blowup_time(f.as_ref(), &d, 1.0 / 512.0, 4.0, opts).unwrap();
    let Some(tb) = tb else {
        return Verdict { pass: false, detail: "difference scheme reports no blowup before t=4".into() };
    };
    let t_final = 0.5 * tb;
    let e0 = total_initial_energy(f.as_ref(), &d).unwrap();
    let mut errs = Vec::new();
    for h in [1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0] {
        let s = sweep(f.as_ref(), &d, h, t_final, &[t_final]);
        let states = fdoracle::run(f.as_ref(), &d, &[t_final], h, opts).unwrap();
        errs.push(fdoracle::compare(&states, &s.isos).unwrap()[0].rel_l2_u);
        let q = s.isos.iter().map(|i| total_energy(i, e0).q).fold(0.0, f64::max);
        shared.q.push(("gauss-like", q, e0));
        if h == 1.0 / 512.0 {
            let b = f.bounds();
            let c_hat = source_bound_constant(f.as_ref(), sample_box(f.as_ref(), &d, t_final), 4096).unwrap();
            let bound = interaction_bound(b.alpha2, b.gamma1, b.m_lower(), c_hat, e0, t_final);
            shared.interaction.push(("gauss-like h=1/512", s.interaction, bound));
        }
    }
    let order = min_order(&errs);
    let secs = start.elapsed().as_secs_f64();
    Verdict {
        pass: errs[2] <= 1e-2 && order >= 1.0 && secs < 120.0,
        detail: format!(
            "T={t_final:.4} (half of blowup {tb:.4}), rel L2 {} at h=dx=1/128,1/256,1/512 (tol 1e-2), order {order:.2} (>= 1), {secs:.1} s (< 120 s)",
            fmt_list(&errs)
        ),
    }
}

/// Largest distance between traced paths and their lattice lines.
fn trace_gap<F: CoefficientField + ?Sized>(
    field: &F,
    data: &InitialData,
    h: f64,
    t_final: f64,
    starts: &[f64],
    label: &'static str,
    shared: &mut Shared,
) -> f64 {
    let grid = solve(field, data, SolveOptions::new(h, t_final)).unwrap();
    let slices = Slices::new(extract_isochrones(&grid, &trace_times(t_final, h), EPS_CONC).unwrap(), Source::Grid);
    let b = field.bounds();
    let mut sup = 0.0f64;
    for &y in starts {
        for family in [Family::Backward, Family::Forward] {
            let foot = nearest_foot(&grid.lattice, family, y);
            let p = trace_characteristic(&slices, field, family, foot, t_final, h).unwrap();
            sup = sup.max(compare_with_gridline(&grid, &p).unwrap().sup_dx);
            shared.paths.push((label, p, b.n_lower(), b.n_upper()));
        }
    }
    sup
}

fn c6_tracing(shared: &mut Shared) -> Verdict {
    let (lin, zero) = preset("linear", "zero");
    let starts: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    let flat = trace_gap(lin.as_ref(), &zero, 1.0 / 64.0, 1.0, &starts, "linear zero data", shared);

    let pulse = preset("linear", "pulse").1;
    let hs = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
    let mut lin_errs = Vec::new();
    for &h in &hs {
        lin_errs.push(trace_gap(lin.as_ref(), &pulse, h, 1.0, &[0.25, 0.5, 0.75], "linear pulse", shared));
    }
    let lin_ok = lin_errs.iter().zip(&hs).all(|(e, h)| *e <= 2.0 * h * h);

    let (lc, gauss) = preset("liquid-crystal", "gauss-like");
    let mut lc_errs = Vec::new();
    for &h in &hs {
        lc_errs.push(trace_gap(lc.as_ref(), &gauss, h, 0.5, &[-0.25, 0.0, 0.25], "liquid-crystal smooth", shared));
    }
    let lc_order = min_order(&lc_errs);
    Verdict {
        pass: flat <= 1e-12 && lin_ok && lc_order >= 1.0,
        detail: format!(
            "zero data {flat:.2e} (tol 1e-12); pulse {} (tol h^2+dt^2); liquid crystal {} order {lc_order:.2} (>= 1); h=dt=1/32,1/64,1/128",
            fmt_list(&lin_errs),
            fmt_list(&lc_errs)
        ),
    }
}

fn c7_structural(shared: &mut Shared) -> Verdict {
    let q_excess = shared.q.iter().map(|(_, q, e0)| q - e0 * e0).fold(f64::NEG_INFINITY, f64::max);
    let srb = shared.interaction.iter().map(|(_, v, b)| v / b).fold(0.0, f64::max);
    // Steps average the speed, so they stay in the bounds up to the trace error.
    let slack = 1e-2;
    let mut speed_lo = f64::INFINITY;
    let mut speed_hi = 0.0f64;
    let mut speeds_ok = true;
    for (_, p, lo, hi) in &shared.paths {
        let (a, b) = p.speed_range();
        speed_lo = speed_lo.min(a / lo);
        speed_hi = speed_hi.max(b / hi);
        speeds_ok &= a >= lo * (1.0 - slack) && b <= hi * (1.0 + slack);
    }
    let pass = !shared.q.is_empty() && q_excess <= 1e-10 && !shared.interaction.is_empty() && srb <= 1.0 && speeds_ok;
    Verdict {
        pass,
        detail: format!(
            "max Q-E0^2 {q_excess:.2e} over {} runs (tol 1e-10); interaction/bound {srb:.2e} (<= 1); \
             {} paths with speed/N_lower >= {speed_lo:.4}, speed/N_upper <= {speed_hi:.4} (1% slack)",
            shared.q.len(),
            shared.paths.len()
        ),
    }
}

fn bits(n: &GridNode) -> Vec<u64> {
    let mut v = vec![n.t.to_bits(), n.x.to_bits(), n.u.to_bits(), n.residual.to_bits(), u64::from(n.iterations)];
    for s in [n.psx_w, n.psx_e, n.qez_s, n.qez_n] {
        v.extend(s.iter().map(|x| x.to_bits()));
    }
    v
}

fn c8_jacobian(_: &mut Shared) -> Verdict {
    let (f, d) = preset("liquid-crystal", "hat-steep");
    let t_final = 0.8;
    let mut worst = Vec::new();
    let (mut checked, mut zero_dets, mut mismatched) = (0usize, 0usize, 0usize);
    for h in [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0] {
        let solver = Solver::new(f.as_ref(), &d, SolveOptions::new(h, t_final)).unwrap();
        let lat = &solver.lattice;
        let xs: Vec<f64> = lat.cols.iter().map(|c| c.coord).collect();
        let ys: Vec<f64> = lat.rows.iter().map(|r| r.coord).collect();
        let field = f.as_ref();
        let interior = |i: usize, j: usize, n: &GridNode| n.t <= t_final && !lat.on_curve(i, j) && !lat.is_ghost(i, j);
        let mut res = 0.0f64;
        let residual = |a: &GridNode, b: &GridNode, along_x: bool, dz: f64| -> f64 {
            let (da, db) = (derive(field, a.x, a.u).unwrap(), derive(field, b.x, b.u).unwrap());
            let al = 0.5 * (da.alpha + db.alpha);
            let c = if along_x { 0.5 * (da.c2 + db.c2) } else { 0.5 * (da.c1 + db.c1) };
            ((b.x - a.x) * al - c * (b.t - a.t)).abs() / dz
        };
        march(&solver, |j, prev: Option<&GridRow>, cur: &GridRow| {
            for (i, n) in cur.iter() {
                if !interior(i, j, n) {
                    continue;
                }
                let dn = derive(field, n.x, n.u)?;
                for psx in [n.psx_w, n.psx_e] {
                    for qez in [n.qez_s, n.qez_n] {
                        let c = n.sided(psx, qez);
                        let zero = jacobian_det(&c, &dn) == 0.0;
                        zero_dets += usize::from(zero);
                        mismatched += usize::from(zero != (c.sigma * c.eta * c.p * c.q == 0.0));
                        checked += 1;
                    }
                }
                if let Some(w) = i.checked_sub(1).and_then(|k| cur.get(k)) {
                    if interior(i - 1, j, w) {
                        res = res.max(residual(w, n, true, xs[i] - xs[i - 1]));
                    }
                }
                if let Some(s) = prev.and_then(|p| p.get(i)) {
                    if interior(i, j - 1, s) {
                        res = res.max(residual(s, n, false, (ys[j] - ys[j - 1]).abs()));
                    }
                }
            }
            Ok(())
        })
        .unwrap();
        worst.push(res);
    }
    let order = min_order(&worst);
    Verdict {
        pass: order >= 1.8 && mismatched == 0,
        detail: format!(
            "max edge residual {} at h=1/64,1/128,1/256, order {order:.2} (>= 1.8); det zero iff sigma*eta*p*q zero on {checked} sided nodes ({zero_dets} zero, {mismatched} mismatched)",
            fmt_list(&worst)
        ),
    }
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn c9_determinism(_: &mut Shared) -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = RunConfig::default();
    c.scenario.preset = "liquid-crystal".into();
    c.data.preset = "hat-steep".into();
    c.t_final = 1.0;
    c.h = 1.0 / 32.0;
    c.output_dir = tmp.path().join("a");
    run(&c).unwrap();
    let first = artifacts(&c.output_dir);
    run(&c).unwrap();
    let repeat_ok = first == artifacts(&c.output_dir);

    c.parallel = true;
    c.output_dir = tmp.path().join("b");
    run(&c).unwrap();
    let par: Vec<_> = artifacts(&c.output_dir).into_iter().filter(|(n, _)| n != "config.toml").collect();
    let seq: Vec<_> = first.iter().filter(|(n, _)| n != "config.toml").cloned().collect();
    let artifacts_ok = par == seq;

    let (f, d) = preset("liquid-crystal", "hat-steep");
    let solver = Solver::new(f.as_ref(), &d, SolveOptions::new(1.0 / 64.0, 1.5)).unwrap();
    let (a, b) = (solve_with(&solver).unwrap(), solve_parallel(&solver).unwrap());
    let grids_ok = a.rows.len() == b.rows.len()
        && a.rows.iter().zip(&b.rows).all(|(r, s)| {
            r.start == s.start
                && r.nodes.len() == s.nodes.len()
                && r.nodes.iter().zip(&s.nodes).all(|(m, n)| bits(m) == bits(n))
        });
    Verdict {
        pass: repeat_ok && artifacts_ok && grids_ok,
        detail: format!(
            "{} artifacts repeat byte-identical {repeat_ok}; parallel run artifacts identical {artifacts_ok}; wavefront grid bitwise equal {grids_ok} ({} nodes)",
            first.len(),
            a.node_count()
        ),
    }
}

type Criterion = (&'static str, fn(&mut Shared) -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("eigenvalue identity", c1_eigenvalues),
        ("coefficient oracle", c2_source_coefficients),
        ("linear exactness", c3_linear_exactness),
        ("conservation through blowup", c4_conservation),
        ("oracle equivalence", c5_oracle),
        ("characteristic consistency", c6_tracing),
        ("structural bounds", c7_structural),
        ("jacobian and proportionality", c8_jacobian),
        ("determinism", c9_determinism),
    ];
    let mut shared = Shared::default();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check(&mut shared);
        failed += usize::from(!v.pass);
        println!(
            "criterion {} {:<30} {}  [{:.1} s] {}",
            k + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
