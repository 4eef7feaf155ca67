//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p expkrylov --test acceptance`.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use expkrylov::bench::{run_sweep, BenchRecord, Sweep};
use expkrylov::config::RunConfig;
use expkrylov::driver::execute;
use expkrylov::formats::load_poles;
use expkrylov::verify::{
    check_error_expansion, check_linear_exactness, check_phi_identity, default_fixture_dir, estimator_curves,
};
use expkrylov_core::linalg::vector;
use expkrylov_core::problems::Problem;
use expkrylov_core::solvers::{
    DirectSolver, IterativeSolver, ShiftedSolver, ShiftedSystemKey, SolverConfig, SolverMode,
};
use expkrylov_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    summary: String,
}

fn outcome(passed: bool, summary: String) -> Outcome {
    Outcome { passed, summary }
}

fn fixture(name: &str) -> PathBuf {
    default_fixture_dir().join(name)
}

fn criterion_1() -> Outcome {
    let poles = match load_poles(&fixture("cf12.poles")) {
        Ok(p) => p,
        Err(e) => return outcome(false, e.to_string()),
    };
    let curves = match estimator_curves(&poles, 40) {
        Ok(c) => c,
        Err(e) => return outcome(false, e),
    };
    let mut passed = true;
    let mut parts = Vec::new();
    for c in &curves {
        let checked = c.points.iter().filter(|p| (1e-12..=1e-1).contains(&p.2)).count();
        let ratio = c.worst_ratio();
        let below = c.first_below(1e-10);
        passed &= ratio <= 100.0 && below.is_some_and(|m| m <= 40) && checked > 0;
        parts.push(format!(
            "{}: factor {ratio:.1} over {checked} points, < 1e-10 at m = {}",
            c.label,
            below.map_or("never".into(), |m| m.to_string())
        ));
    }
    outcome(passed, parts.join("; "))
}

fn criterion_2() -> Outcome {
    let c = check_error_expansion(20);
    outcome(c.passed, format!("max relative mismatch {:.2e} (<= 1e-8); {}", c.value, c.detail))
}

fn criterion_3() -> Outcome {
    let c = check_phi_identity(50);
    outcome(c.passed, format!("max relative error {:.2e} (<= 1e-9); {}", c.value, c.detail))
}

fn eoc_config(integrator: &str, h: f64, tol: f64) -> RunConfig {
    RunConfig {
        problem: "ac2d".into(),
        nx: 50,
        eps2: 0.1,
        bc: "neumann".into(),
        integrator: integrator.into(),
        h,
        t_end: 1.0,
        tol,
        ..RunConfig::default()
    }
}

/// Least-squares slope of `log err` against `log h`.
fn slope(hs: &[f64], errs: &[f64]) -> f64 {
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn criterion_4(residuals: &mut Vec<f64>) -> Outcome {
    let reference = match execute(&eoc_config("krogstad4", 2f64.powi(-10), 1e-12)) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("reference run failed: {e}")),
    };
    residuals.push(reference.trajectory.max_solver_residual());
    let uref = reference.trajectory.final_state;
    let hs: Vec<f64> = (1..=6).map(|k| 2f64.powi(-k)).collect();
    let mut passed = true;
    let mut parts = Vec::new();
    for (method, order) in [("sw2", 2.0), ("etd3rk", 3.0), ("krogstad4", 4.0)] {
        let mut errs = Vec::new();
        for &h in &hs {
            match execute(&eoc_config(method, h, 1e-12)) {
                Ok(out) => {
                    residuals.push(out.trajectory.max_solver_residual());
                    let diff: Vec<f64> = out.trajectory.final_state.iter().zip(&uref).map(|(a, b)| a - b).collect();
                    errs.push(vector::norm_inf_real(&diff));
                }
                Err(e) => return outcome(false, format!("{method} h = {h}: {e}")),
            }
        }
        let s = slope(&hs, &errs);
        passed &= (s - order).abs() <= 0.4;
        let errs: Vec<String> = errs.iter().map(|e| format!("{e:.1e}")).collect();
        parts.push(format!("{method} slope {s:.2} (target {order}) errors [{}]", errs.join(", ")));
    }
    outcome(passed, parts.join("; "))
}

fn sweep_records() -> Vec<BenchRecord> {
    let base = RunConfig {
        problem: "ac2d".into(),
        integrator: "sw2".into(),
        h: 0.5,
        t_end: 1.0,
        poles: Some(fixture("rhp16.poles")),
        solver: "iterative".into(),
        ..RunConfig::default()
    };
    let sweep = Sweep { base, sizes: vec![64, 128, 256], engines: vec!["rational".into(), "polynomial".into()] };
    run_sweep(&sweep, |_| {})
}

fn rows<'a>(records: &'a [BenchRecord], engine: &str) -> Vec<&'a BenchRecord> {
    records.iter().filter(|r| r.engine == engine).collect()
}

fn criterion_5(records: &[BenchRecord]) -> Outcome {
    if let Some(r) = records.iter().find(|r| !r.error.is_empty()) {
        return outcome(false, format!("{} nx = {}: {}", r.engine, r.size, r.error));
    }
    let rat: Vec<f64> = rows(records, "rational").iter().map(|r| r.avg_iterations).collect();
    let poly: Vec<f64> = rows(records, "polynomial").iter().map(|r| r.avg_iterations).collect();
    let (lo, hi) = rat.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    let flat = hi / lo <= 1.5;
    let increasing = poly.windows(2).all(|w| w[1] > w[0]);
    let gap = poly[2] / rat[2];
    let converged = records.iter().all(|r| r.converged);
    outcome(
        flat && increasing && gap >= 3.0 && converged,
        format!(
            "rational avg iterations {rat:?} (max/min {:.2} <= 1.5); polynomial {poly:?} (increasing: {increasing}); nx = 256 ratio {gap:.1} (>= 3)",
            hi / lo
        ),
    )
}

fn criterion_6(records: &[BenchRecord]) -> Outcome {
    let times: Vec<f64> = rows(records, "rational").iter().map(|r| r.wall_time).collect();
    if times.len() != 3 || records.iter().any(|r| !r.error.is_empty()) {
        return outcome(false, "sweep incomplete".into());
    }
    let (g1, g2) = (times[1] / times[0], times[2] / times[1]);
    outcome(
        g1 <= 6.0 && g2 <= 6.0,
        format!("rational wall times {:.3?} s; growth {g1:.2} and {g2:.2} per 4x unknowns (<= 6)", times),
    )
}

fn criterion_7(residuals: &[f64], records: &[BenchRecord]) -> Outcome {
    let worst_run = residuals
        .iter()
        .copied()
        .chain(records.iter().map(|r| r.max_solver_residual))
        .fold(0.0, f64::max);
    let problem = match Problem::allen_cahn_default(64) {
        Ok(p) => p,
        Err(e) => return outcome(false, e.to_string()),
    };
    let a = &problem.operator;
    let poles = match load_poles(&fixture("rhp16.poles")) {
        Ok(p) => p,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut direct = DirectSolver::default();
    let mut iterative = match IterativeSolver::new(SolverConfig { mode: SolverMode::Iterative, ..SolverConfig::default() }) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut worst_diff: f64 = 0.0;
    let mut checked = 0;
    for &pole in poles.poles().iter().step_by(3) {
        for scale in [0.05, 0.5] {
            let key = ShiftedSystemKey::new(pole, scale, a);
            let rhs: Vec<C64> =
                (0..a.n()).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let (x, y) = match (direct.solve(a, &key, &rhs), iterative.solve(a, &key, &rhs)) {
                (Ok(x), Ok(y)) => (x, y),
                (Err(e), _) | (_, Err(e)) => return outcome(false, format!("spot check failed: {e}")),
            };
            worst_diff = worst_diff.max(vector::norm2(&vector::sub(&x.x, &y.x)) / vector::norm2(&x.x));
            checked += 1;
        }
    }
    outcome(
        worst_run <= 1e-6 && worst_diff <= 1e-6,
        format!(
            "max relative residual in criteria 4-6 runs {worst_run:.2e} (<= 1e-6); direct vs iterative on {checked} systems {worst_diff:.2e} (<= 1e-6)"
        ),
    )
}

fn criterion_8() -> Outcome {
    let c = check_linear_exactness();
    outcome(c.passed, format!("worst error / (10 tol steps) = {:.2e} (<= 1); {}", c.value, c.detail))
}

fn criterion_9() -> Outcome {
    let cfg = RunConfig {
        problem: "graph-ac".into(),
        graph_nodes: 2640,
        eps: 0.05,
        integrator: "krogstad4".into(),
        h: 0.05,
        t_end: 1.0,
        poles: Some(fixture("cf12.poles")),
        solver: "direct".into(),
        ..RunConfig::default()
    };
    match execute(&cfg) {
        Ok(out) => {
            let t = &out.trajectory;
            let finite = t.final_state.iter().all(|x| x.is_finite());
            let bound = vector::norm_inf_real(&t.final_state);
            let every = t.calls.iter().all(|c| c.estimate <= cfg.tol && c.converged);
            outcome(
                finite && bound <= 1.5 && every,
                format!(
                    "n = {}, {} expmv calls, max |u| = {bound:.4} (<= 1.5), max estimate {:.2e} (<= {:.0e}), mean dimension {:.2}",
                    out.n,
                    t.calls.len(),
                    t.max_estimate(),
                    cfg.tol,
                    t.mean_dimension()
                ),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion_10() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_expkrylov")).arg("verify").output();
    match out {
        Ok(o) => {
            let text = String::from_utf8_lossy(&o.stdout);
            let failed = text.lines().filter(|l| l.contains(" FAIL ")).count();
            outcome(o.status.success(), format!("exit code {:?}, {failed} failing checks", o.status.code()))
        }
        Err(e) => outcome(false, format!("cannot launch the binary: {e}")),
    }
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |id: u32, limit: f64, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        let ok = o.passed && secs <= limit;
        all &= ok;
        println!(
            "{} criterion {id}: {} [{secs:.1} s, limit {limit:.0} s]",
            if ok { "PASS" } else { "FAIL" },
            o.summary
        );
    };
    let mut residuals = Vec::new();
    report(1, 60.0, &mut criterion_1);
    report(2, 30.0, &mut criterion_2);
    report(3, 30.0, &mut criterion_3);
    report(4, 600.0, &mut || criterion_4(&mut residuals));
    let mut records = Vec::new();
    report(5, 900.0, &mut || {
        records = sweep_records();
        criterion_5(&records)
    });
    report(6, 900.0, &mut || criterion_6(&records));
    report(7, 60.0, &mut || criterion_7(&residuals, &records));
    report(8, 30.0, &mut criterion_8);
    report(9, 300.0, &mut criterion_9);
    report(10, 120.0, &mut criterion_10);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
