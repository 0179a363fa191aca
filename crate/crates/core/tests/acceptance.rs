//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion and exits non-zero if any of them fails.

use std::process::ExitCode;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xdg_shockfit::euler::{physical_flux, post_shock_state, pre_shock_state};
use xdg_shockfit::grid::{BackgroundGrid, CutCellGrid, LevelSet, Species};
use xdg_shockfit::report::{history_csv, parse_history};
use xdg_shockfit::riemann::{godunov_flux, solve_riemann};
use xdg_shockfit::shockfit::{shift_direction, Direction, INDICATOR_ZERO_TOL};
use xdg_shockfit::timestepper::{fd_jacobian, implicit_euler_step, max_norm, SemiDiscrete};
use xdg_shockfit::xdg::{XdgField, XdgSpace, NUM_COMPONENTS};
use xdg_shockfit::{
    GasModel, InitKind, LoopConfig, PrimitiveState, PseudoTimeTrace, ShockCase, SolverConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn default_trace() -> PseudoTimeTrace {
    ShockCase::default()
        .run(&SolverConfig::default(), &LoopConfig::default())
        .expect("default configuration runs")
}

fn criterion_1(trace: &PseudoTimeTrace) -> Outcome {
    let err = (trace.final_x - 0.55).abs();
    let n = trace.steps.len();
    outcome(
        trace.converged && err <= 1e-4 && n <= 15,
        format!(
            "|x - 0.55| = {err:.3e} after {n} pseudo-steps, termination {:?} (need <= 1e-4 within 15)",
            trace.termination
        ),
    )
}

fn criterion_2(trace: &PseudoTimeTrace) -> Outcome {
    let Some(first) = trace.steps.first().and_then(|s| s.indicators) else {
        return outcome(false, "first pseudo-step has no indicator values".into());
    };
    let Some(second) = trace.steps.get(1) else {
        return outcome(false, "no second pseudo-step".into());
    };
    let expected_x1 = (0.5_f64 + 0.57) / 2.0;
    let ok_i = (first.i_p0 - (-0.389)).abs() <= 0.02;
    let ok_x = second.x_interface == expected_x1;
    outcome(
        ok_i && ok_x,
        format!(
            "I_P0(t0) = {:.5} (need -0.389 +- 0.02), x1 = {:.17} (need {:.17})",
            first.i_p0, second.x_interface, expected_x1
        ),
    )
}

fn criterion_3(trace: &PseudoTimeTrace) -> Outcome {
    let dir = std::env::temp_dir().join(format!("xdg-shockfit-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("history.csv");
    std::fs::write(&path, history_csv(trace)).expect("write history.csv");
    let text = std::fs::read_to_string(&path).expect("read history.csv");
    let _ = std::fs::remove_dir_all(&dir);
    let rows = match parse_history(&text) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("history.csv does not parse: {e}")),
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for l in [0usize, 2] {
        let Some(row) = rows.iter().find(|r| r.l == l) else {
            return outcome(false, format!("history.csv has no row for t{l}"));
        };
        let d = |v: f64| shift_direction(v, INDICATOR_ZERO_TOL).unwrap_or(Direction::Converged);
        let (p0, rho, mom) = (d(row.i_p0), d(row.i_rho), d(row.i_mom));
        let opposite = |x: Direction| x != p0 && x != Direction::Converged;
        pass &= opposite(rho) && opposite(mom);
        parts.push(format!(
            "t{l}: I_P0 {} ({:+.3e}), I_rho {} ({:+.3e}), I_m {} ({:+.3e})",
            p0.name(),
            row.i_p0,
            rho.name(),
            row.i_rho,
            mom.name(),
            row.i_mom
        ));
    }
    outcome(pass, format!("{} (need I_rho and I_m opposite to I_P0)", parts.join("; ")))
}

fn criterion_4() -> Outcome {
    let gas = GasModel::default();
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let m = 1.0 + 4.0 * k as f64 / 49.0;
        let pre = pre_shock_state(m, &gas);
        let post = post_shock_state(&pre, m, &gas).expect("compressive shock");
        let mass = (pre.rho * pre.u - post.rho * post.u).abs();
        let mom = (pre.p + pre.rho * pre.u * pre.u - (post.p + post.rho * post.u * post.u)).abs();
        worst = worst.max(mass).max(mom);
    }
    let pre = pre_shock_state(1.0, &gas);
    let identity = post_shock_state(&pre, 1.0, &gas).map(|p| p == pre).unwrap_or(false);
    outcome(
        worst <= 1e-12 && identity,
        format!("max mass/momentum defect {worst:.3e} over 50 Mach numbers in [1, 5] (need <= 1e-12), M = 1 identity: {identity}"),
    )
}

fn random_state(rng: &mut ChaCha8Rng) -> PrimitiveState {
    PrimitiveState::new(rng.gen_range(0.1..10.0), rng.gen_range(-5.0..5.0), rng.gen_range(0.1..10.0))
}

/// Pressure function of one side of a Riemann problem.
fn side_pressure_fn(p: f64, w: &PrimitiveState, g: f64) -> f64 {
    let a = (g * w.p / w.rho).sqrt();
    if p > w.p {
        let a_k = 2.0 / ((g + 1.0) * w.rho);
        let b_k = (g - 1.0) / (g + 1.0) * w.p;
        (p - w.p) * (a_k / (p + b_k)).sqrt()
    } else {
        2.0 * a / (g - 1.0) * ((p / w.p).powf((g - 1.0) / (2.0 * g)) - 1.0)
    }
}

/// Star pressure by plain bisection on the monotone pressure function.
fn bisection_p_star(l: &PrimitiveState, r: &PrimitiveState, g: f64) -> f64 {
    let f = |p: f64| side_pressure_fn(p, l, g) + side_pressure_fn(p, r, g) + (r.u - l.u);
    let (mut lo, mut hi) = (1e-14, 1.0);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_5() -> Outcome {
    let gas = GasModel::default();
    let g = gas.gamma;
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let mut consistency: f64 = 0.0;
    for _ in 0..1000 {
        let u = random_state(&mut rng).to_conserved(&gas);
        let f = godunov_flux(&u, &u, &gas).expect("flux");
        let exact = physical_flux(&u, &gas).expect("flux");
        for c in 0..3 {
            consistency = consistency.max((f[c] - exact[c]).abs());
        }
    }

    let mut stationary: f64 = 0.0;
    for k in 0..20 {
        let m = 1.05 + 3.95 * k as f64 / 19.0;
        let pre = pre_shock_state(m, &gas);
        let post = post_shock_state(&pre, m, &gas).expect("post state");
        let (cpre, cpost) = (pre.to_conserved(&gas), post.to_conserved(&gas));
        let f = godunov_flux(&cpre, &cpost, &gas).expect("flux");
        let fpre = physical_flux(&cpre, &gas).expect("flux");
        let fpost = physical_flux(&cpost, &gas).expect("flux");
        for c in 0..3 {
            stationary = stationary.max((f[c] - fpre[c]).abs()).max((f[c] - fpost[c]).abs());
        }
    }

    let mut p_star: f64 = 0.0;
    let mut solved = 0;
    while solved < 200 {
        let l = PrimitiveState::new(rng.gen_range(0.2..5.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.2..5.0));
        let r = PrimitiveState::new(rng.gen_range(0.2..5.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.2..5.0));
        let (al, ar) = ((g * l.p / l.rho).sqrt(), (g * r.p / r.rho).sqrt());
        if 2.0 * (al + ar) / (g - 1.0) <= r.u - l.u {
            continue;
        }
        let s = solve_riemann(&l, &r, &gas).expect("riemann");
        p_star = p_star.max((s.p_star - bisection_p_star(&l, &r, g)).abs());
        solved += 1;
    }

    outcome(
        consistency <= 1e-13 && stationary <= 1e-10 && p_star <= 1e-10,
        format!(
            "consistency {consistency:.3e} (need <= 1e-13), stationary shock {stationary:.3e} (need <= 1e-10), p_star vs bisection {p_star:.3e} (need <= 1e-10)"
        ),
    )
}

fn criterion_6() -> Outcome {
    let case = ShockCase {
        interface_init: 0.55,
        init: InitKind::Exact,
        ..ShockCase::default()
    };
    let solver = SolverConfig::default();
    let problem = case.problem().expect("problem");
    let field = case.initial_field(&problem).expect("field");
    let op = problem.operator(field.space().clone(), &solver);
    let r = max_norm(&SemiDiscrete::residual(&op, field.coeffs()).expect("residual"));
    let step = implicit_euler_step(&op, field.coeffs(), &solver).expect("step");
    let change = field
        .coeffs()
        .iter()
        .zip(&step.state)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    outcome(
        r <= 1e-10 && change <= 1e-9,
        format!("|R|_inf = {r:.3e} (need <= 1e-10), one implicit step changes U by {change:.3e} (need <= 1e-9)"),
    )
}

fn criterion_7() -> Outcome {
    let case = ShockCase::default();
    let solver = SolverConfig::default();
    let problem = case.problem().expect("problem");
    let field = case.initial_field(&problem).expect("field");
    let op = problem.operator(field.space().clone(), &solver);
    let u = field.coeffs().to_vec();
    let res = |v: &[f64]| SemiDiscrete::residual(&op, v);

    let batched = fd_jacobian(res, &u, &solver, op.locality()).expect("jacobian");
    let unbatched = fd_jacobian(res, &u, &SolverConfig { batching: false, ..solver }, None).expect("jacobian");
    let identical = batched.iter().zip(unbatched.iter()).all(|(a, b)| a.to_bits() == b.to_bits());

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let r0 = res(&u).expect("residual");
    let delta = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let v: Vec<f64> = (0..u.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let jv = &batched * nalgebra::DVector::from_column_slice(&v);
        let up: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + delta * b).collect();
        let rp = res(&up).expect("residual");
        let fd: Vec<f64> = rp.iter().zip(&r0).map(|(a, b)| (a - b) / delta).collect();
        let diff = jv.iter().zip(&fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(diff / max_norm(&fd));
    }
    outcome(
        worst <= 1e-4 && identical,
        format!("directional relative error {worst:.3e} over 10 random directions (need <= 1e-4), batched == unbatched bitwise: {identical}"),
    )
}

/// Mean of an element polynomial by composite Simpson, exact for cubics.
fn simpson_mean(field: &XdgField, e: usize, comp: usize) -> f64 {
    let el = field.space().element(e);
    let panels = 8;
    let h = (el.x_hi - el.x_lo) / panels as f64;
    let f = |x: f64| field.element_value(e, x)[comp];
    let mut sum = 0.0;
    for k in 0..panels {
        let a = el.x_lo + k as f64 * h;
        sum += h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h));
    }
    sum / (el.x_hi - el.x_lo)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let background = BackgroundGrid::uniform(0.0, 1.0, 10).expect("grid");
    let mut mean_err: f64 = 0.0;
    let mut poly_err: f64 = 0.0;
    for &x_i in &[0.535, 0.55, 0.57, 0.5481, 0.23] {
        for degree in 0..=3 {
            let grid = CutCellGrid::cut(&background, LevelSet::new(x_i, &background).expect("level set"));
            let space = Arc::new(XdgSpace::new(grid, degree).expect("space"));

            let coeffs: Vec<f64> = (0..space.num_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let field = XdgField::from_coeffs(space.clone(), coeffs);
            for (e, el) in space.grid().elements().iter().enumerate() {
                for c in 0..NUM_COMPONENTS {
                    let p0 = field.p0_projection(el.cell, el.species, c).expect("p0");
                    mean_err = mean_err.max((p0 - simpson_mean(&field, e, c)).abs());
                }
            }

            // one random polynomial per element, in monomials about its midpoint
            let polys: Vec<Vec<f64>> = (0..space.num_elements() * NUM_COMPONENTS)
                .map(|_| (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let eval = |e: usize, c: usize, x: f64| {
                let el = space.element(e);
                let t = (x - 0.5 * (el.x_lo + el.x_hi)) / (el.x_hi - el.x_lo);
                polys[e * NUM_COMPONENTS + c].iter().rev().fold(0.0, |acc, a| acc * t + a)
            };
            let target = |x: f64| {
                let side = if x < x_i { Species::A } else { Species::B };
                let e = space.grid().locate(x, side);
                [eval(e, 0, x), eval(e, 1, x), eval(e, 2, x)]
            };
            let projected = XdgField::project(space.clone(), target).expect("projection");
            for (e, el) in space.grid().elements().iter().enumerate() {
                for k in 0..=10 {
                    let x = el.x_lo + (el.x_hi - el.x_lo) * k as f64 / 10.0;
                    let v = projected.element_value(e, x);
                    for (c, vc) in v.iter().enumerate() {
                        poly_err = poly_err.max((vc - eval(e, c, x)).abs());
                    }
                }
            }
        }
    }
    outcome(
        mean_err <= 1e-12 && poly_err <= 1e-12,
        format!("p0 vs Simpson means {mean_err:.3e}, polynomial reproduction {poly_err:.3e} (need <= 1e-12, P = 0..3)"),
    )
}

fn criterion_9() -> Outcome {
    let case = ShockCase {
        mach_s: 2.0,
        shock_pos: 0.525,
        interface_init: 0.58,
        ..ShockCase::default()
    };
    // 0.58 leaves a 0.2 volume fraction and the target 0.525 a 0.25 one, so
    // the default 0.3 threshold would reject the start; use 0.2 instead.
    let cfg = LoopConfig {
        delta_agg: 0.2,
        ..LoopConfig::default()
    };
    match case.run(&SolverConfig::default(), &cfg) {
        Ok(trace) => {
            let err = (trace.final_x - 0.525).abs();
            let mut detail = format!(
                "|x - 0.525| = {err:.3e} after {} pseudo-steps, termination {:?} (need <= 1e-4)",
                trace.steps.len(),
                trace.termination
            );
            if let Some(f) = trace.steps.last().and_then(|s| s.steady.failure.clone()) {
                detail.push_str(&format!(", last steady solve failed: {f}"));
            }
            if let Some(e) = &trace.error {
                detail.push_str(&format!(", loop error: {e}"));
            }
            outcome(trace.converged && err <= 1e-4, detail)
        }
        Err(e) => outcome(false, format!("run failed: {e}")),
    }
}

fn main() -> ExitCode {
    let trace = default_trace();
    let results = [
        ("interface convergence", criterion_1(&trace)),
        ("first indicator value and bisection step", criterion_2(&trace)),
        ("jump indicators fail at t0 and t2", criterion_3(&trace)),
        ("Rankine-Hugoniot relations", criterion_4()),
        ("Godunov flux", criterion_5()),
        ("discrete steady-state fixed point", criterion_6()),
        ("Jacobian verification", criterion_7()),
        ("projection oracle", criterion_8()),
        ("generalization M = 2.0, x_s = 0.525, x0 = 0.58", criterion_9()),
    ];
    let mut passed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("criterion {} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        passed += o.pass as usize;
    }
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
