//! Oracle suite behind `expkrylov verify`. Every check compares library
//! output with a reference computed by a different route.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use expkrylov_core::integrators::{integrate, stage_to_expmv, PolynomialEngine, RationalEngine, Registry, BUILTIN_TABLEAUS};
use expkrylov_core::krylov::{assemble_augmented, expmv_rational, ExpmvOptions, RationalDecomposition};
use expkrylov_core::linalg::{dense_expm, phi_dense, vector, DenseMatrix, SparseOperator};
use expkrylov_core::poles::{Pole, PoleKind, PoleSet};
use expkrylov_core::problems::{fd_laplacian_2d, BoundaryCondition, Problem};
use expkrylov_core::solvers::DirectSolver;
use expkrylov_core::C64;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formats;
use crate::oracle::{laplacian_1d_spectrum, taylor_expm, Spectral};

/// One row of the verification table.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    /// Worst measured value (an error or a ratio, see `detail`).
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Check {
    fn measured(name: &'static str, value: f64, threshold: f64, detail: String) -> Self {
        Self { name, value, threshold, passed: value <= threshold, detail, seconds: 0.0 }
    }

    fn failed(name: &'static str, threshold: f64, detail: String) -> Self {
        Self { name, value: f64::NAN, threshold, passed: false, detail, seconds: 0.0 }
    }
}

/// Inputs of the suite that live on disk.
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Directory holding `cf12.poles`.
    pub fixtures: PathBuf,
    /// Tableau registry file; the compiled-in registry when unset.
    pub tableaus: Option<PathBuf>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { fixtures: default_fixture_dir(), tableaus: None }
    }
}

/// `$EXPKRYLOV_FIXTURES`, or the pole directory of the source tree.
pub fn default_fixture_dir() -> PathBuf {
    std::env::var_os("EXPKRYLOV_FIXTURES")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("poles"))
}

pub const ESTIMATOR_FIXTURE: &str = "cf12.poles";

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel_err(x: &[C64], y: &[C64]) -> f64 {
    vector::norm2(&vector::sub(x, y)) / vector::norm2(y)
}

fn timed(f: impl FnOnce() -> Check) -> Check {
    let start = Instant::now();
    let mut check = f();
    check.seconds = start.elapsed().as_secs_f64();
    check
}

/// Runs every check in a fixed order.
pub fn run_all(opts: &VerifyOptions) -> Vec<Check> {
    vec![
        timed(check_dense_expm),
        timed(|| check_phi_identity(50)),
        timed(|| check_error_expansion(20)),
        timed(|| check_estimator(&opts.fixtures)),
        timed(|| check_etd3rk_stage2(opts.tableaus.as_deref())),
        timed(check_linear_exactness),
    ]
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// Fixed-width table of checks.
pub fn format_table(checks: &[Check]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<24} {:>12} {:>12} {:>8} {:>6}  detail", "check", "value", "threshold", "seconds", "result");
    for ch in checks {
        let _ = writeln!(
            s,
            "{:<24} {:>12.3e} {:>12.3e} {:>8.2} {:>6}  {}",
            ch.name,
            ch.value,
            ch.threshold,
            ch.seconds,
            if ch.passed { "ok" } else { "FAIL" },
            ch.detail
        );
    }
    s
}

/// Sparse SPD matrix with spectrum in `[0, lambda]`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, lambda: f64) -> SparseOperator {
    let mut trip = Vec::new();
    for i in 0..n {
        for j in 0..i {
            if rng.random_bool(0.15) {
                let w = rng.random_range(0.0..1.0);
                trip.extend([(i, j, -w), (j, i, -w), (i, i, w), (j, j, w)]);
            }
        }
        trip.push((i, i, rng.random_range(0.0..0.5)));
    }
    let a = SparseOperator::from_triplets(n, &trip).expect("valid triplets");
    let s = lambda / a.gershgorin_upper();
    a.scaled(s)
}

pub fn random_vectors(rng: &mut ChaCha8Rng, count: usize, n: usize, complex: bool) -> Vec<Vec<C64>> {
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| c(rng.random_range(-1.0..1.0), if complex { rng.random_range(-1.0..1.0) } else { 0.0 }))
                .collect()
        })
        .collect()
}

/// Padé `expm` against a plain Taylor series with scaling and squaring, on
/// symmetric, non-normal and complex matrices.
pub fn check_dense_expm() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for trial in 0..12 {
        let n = 4 + 3 * trial;
        let norm = [0.1, 2.0, 30.0][trial % 3];
        let z = DenseMatrix::from_fn(n, n, |i, j| {
            let re = rng.random_range(-1.0..1.0);
            let im = if trial % 2 == 1 { rng.random_range(-1.0..1.0) } else { 0.0 };
            let upper = if i <= j || trial % 4 != 3 { 1.0 } else { 0.0 };
            c(re * upper, im * upper)
        });
        let z = z.scaled(c(norm / z.norm1(), 0.0));
        let z = if trial % 3 == 2 { z.add(&z.transpose()).scaled(c(-0.5, 0.0)) } else { z };
        let got = match dense_expm(&z) {
            Ok(m) => m,
            Err(e) => return Check::failed("dense expm", 1e-12, format!("expm failed: {e}")),
        };
        let want = taylor_expm(&z);
        worst = worst.max(got.sub(&want).norm1() / want.norm1());
    }
    Check::measured("dense expm", worst, 1e-12, "relative 1-norm vs Taylor series, 12 matrices".into())
}

/// `expmv` of the augmented operator against `Σ h^k φ_k(-hαA) c_k`, with
/// the φ-functions taken both from `phi_dense` and from an eigendecomposition.
pub fn check_phi_identity(instances: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let poles = PoleSet::repeated_real(1.0, 72).expect("valid poles");
    let mut worst_eig: f64 = 0.0;
    let mut worst_dense: f64 = 0.0;
    for trial in 0..instances {
        let n = rng.random_range(10..=60);
        let p = trial % 4;
        let lambda = rng.random_range(1.0..100.0);
        let a = random_spd(&mut rng, n, lambda);
        let alpha = rng.random_range(0.5..2.0);
        let h = rng.random_range(0.05..1.0);
        let cs = random_vectors(&mut rng, p + 1, n, trial % 2 == 0);
        let want = Spectral::new(&a).phi_combination(alpha, h, &cs);
        let z = a.to_dense().scaled(c(-h * alpha, 0.0));
        let mut via_dense = vector::zeros(n);
        for (k, ck) in cs.iter().enumerate() {
            match phi_dense(&z, k) {
                Ok(phi) => vector::axpy(c(h.powi(k as i32), 0.0), &phi.matvec(ck), &mut via_dense),
                Err(e) => return Check::failed("phi identity", 1e-9, format!("phi_dense failed: {e}")),
            }
        }
        let opts = ExpmvOptions::rational(PoleKind::RepeatedReal).with_tol(1e-12 * vector::norm2(&want));
        let rep = match expmv_rational(&a, alpha, &cs, h, &poles, &opts, &mut DirectSolver::default()) {
            Ok(r) => r,
            Err(e) => return Check::failed("phi identity", 1e-9, format!("instance {trial}: expmv failed: {e}")),
        };
        worst_eig = worst_eig.max(rel_err(&rep.result, &want));
        worst_dense = worst_dense.max(rel_err(&rep.result, &via_dense));
    }
    Check::measured(
        "phi identity",
        worst_eig.max(worst_dense),
        1e-9,
        format!("{instances} instances, p = 0..3; vs eigen {worst_eig:.1e}, vs phi_dense {worst_dense:.1e}"),
    )
}

/// Thirty-term error series against the true error of a rational Arnoldi
/// approximation whose last pole is infinite.
pub fn check_error_expansion(instances: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst: f64 = 0.0;
    let mut smallest = f64::INFINITY;
    for trial in 0..instances {
        let p = trial % 4;
        let n = rng.random_range(10..=60 - p);
        let lambda = rng.random_range(1.0..8.0);
        let a = random_spd(&mut rng, n, lambda);
        let h = rng.random_range(0.2..1.0);
        let cs = random_vectors(&mut rng, p + 1, n, trial % 2 == 1);
        let truth = Spectral::new(&a).augmented_exp(1.0, h, &cs);
        let (aug, start) = assemble_augmented(&a, 1.0, &cs).expect("consistent inputs");
        let mut finite = Vec::new();
        for _ in 0..2 {
            let (re, im) = (rng.random_range(0.5..4.0), rng.random_range(0.5..3.0));
            finite.extend([Pole::Finite(c(re, im)), Pole::Finite(c(re, -im))]);
        }
        finite.push(Pole::Finite(c(rng.random_range(0.5..4.0), 0.0)));
        let scale = vector::norm2(&truth);
        // Longest prefix whose error stays well above the reference's roundoff.
        let mut chosen = None;
        for k in 1..=finite.len() {
            let mut d = RationalDecomposition::new(&start).expect("nonzero start");
            let mut solver = DirectSolver::default();
            for &pole in finite[..k].iter().chain([&Pole::Infinite]) {
                if let Err(e) = d.step(&aug, pole, &mut solver) {
                    return Check::failed("error expansion", 1e-8, format!("instance {trial}: {e}"));
                }
            }
            let approx = d.approximant(h).expect("evaluable");
            let err = vector::norm2(&vector::sub(&truth, &approx));
            if chosen.is_some() && err < 1e-6 * scale {
                break;
            }
            chosen = Some((d, err));
        }
        let (d, err) = chosen.expect("at least one prefix");
        let series = match d.full_error_expansion(&aug, h, 30) {
            Ok(s) => s,
            Err(e) => return Check::failed("error expansion", 1e-8, format!("instance {trial}: {e}")),
        };
        smallest = smallest.min(err / scale);
        worst = worst.max((series - err).abs() / err);
    }
    Check::measured(
        "error expansion",
        worst,
        1e-8,
        format!("{instances} instances, 30 terms; smallest relative error {smallest:.1e}"),
    )
}

/// The three test matrices with spectra mapped onto `[1, 1000]`, with
/// eigenpairs in closed form.
pub fn estimator_matrices() -> Vec<(&'static str, SparseOperator, Spectral)> {
    let map = |vals: &[f64]| {
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        let s = 999.0 / (hi - lo);
        (s, 1.0 - s * lo)
    };
    let (v1, q1) = laplacian_1d_spectrum(900);
    let (s1, t1) = map(&v1);
    let lap1 = SparseOperator::tridiagonal(900, -1.0, 2.0, -1.0).scaled(s1).shifted(1.0, t1);
    let spec1 = Spectral::from_parts(v1.iter().map(|v| s1 * v + t1).collect(), q1);

    let (v30, q30) = laplacian_1d_spectrum(30);
    let t30 = SparseOperator::tridiagonal(30, -1.0, 2.0, -1.0);
    let vals2: Vec<f64> = (0..900).map(|k| v30[k / 30] + v30[k % 30]).collect();
    let (s2, t2) = map(&vals2);
    let lap2 = SparseOperator::kron_sum(&t30, &t30).scaled(s2).shifted(1.0, t2);
    let q2 = DMatrix::from_fn(900, 900, |i, k| q30[(i / 30, k / 30)] * q30[(i % 30, k % 30)]);
    let spec2 = Spectral::from_parts(vals2.iter().map(|v| s2 * v + t2).collect(), q2);

    let v3: Vec<f64> = (1..=900).map(|k| k as f64).collect();
    let (s3, t3) = map(&v3);
    let trip: Vec<(usize, usize, f64)> = v3.iter().enumerate().map(|(i, &v)| (i, i, s3 * v + t3)).collect();
    let diag = SparseOperator::from_triplets(900, &trip).expect("diagonal");
    let spec3 = Spectral::from_parts(trip.iter().map(|t| t.2).collect(), DMatrix::identity(900, 900));

    vec![("1D Laplacian", lap1, spec1), ("2D Laplacian", lap2, spec2), ("diagonal", diag, spec3)]
}

/// Estimate and true error of one estimator curve, one entry per dimension.
#[derive(Clone, Debug, Default)]
pub struct EstimatorCurve {
    pub label: String,
    /// `(m, estimate, true error)`.
    pub points: Vec<(usize, f64, f64)>,
}

impl EstimatorCurve {
    /// Largest `max(est/err, err/est)` over points with error in `[1e-12, 1e-1]`.
    pub fn worst_ratio(&self) -> f64 {
        self.points
            .iter()
            .filter(|(_, _, err)| (1e-12..=1e-1).contains(err))
            .map(|&(_, est, err)| (est / err).max(err / est))
            .fold(1.0, f64::max)
    }

    /// First `m` at which both estimate and error are below `level`.
    pub fn first_below(&self, level: f64) -> Option<usize> {
        self.points.iter().find(|(_, est, err)| *est < level && *err < level).map(|p| p.0)
    }
}

/// Both settings for every test matrix: `h = 1` with the constant vector of
/// unit norm, `h = 0.01` with complex uniform entries. Each point appends an
/// infinite pole to a copy of the decomposition before evaluating.
pub fn estimator_curves(poles: &PoleSet, max_m: usize) -> Result<Vec<EstimatorCurve>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut curves = Vec::new();
    for (name, a, spec) in estimator_matrices() {
        let n = a.n();
        let settings = [
            ("a", 1.0, vec![c(1.0 / 30.0, 0.0); n]),
            ("b", 0.01, (0..n).map(|_| c(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0))).collect()),
        ];
        for (tag, h, start) in settings {
            let truth = spec.apply(|l| (-h * l).exp(), &start);
            let (aug, s) = assemble_augmented(&a, h, &[start]).map_err(|e| e.to_string())?;
            let mut d = RationalDecomposition::new(&s).map_err(|e| e.to_string())?;
            let mut solver = DirectSolver::default();
            let mut curve = EstimatorCurve { label: format!("{name} ({tag})"), points: Vec::new() };
            for j in 0..max_m - 1 {
                d.step(&aug, poles.get(j), &mut solver).map_err(|e| e.to_string())?;
                let mut probe = d.clone();
                probe.step(&aug, Pole::Infinite, &mut solver).map_err(|e| e.to_string())?;
                let ev = probe.evaluate(1.0).map_err(|e| e.to_string())?;
                let err = vector::norm2(&vector::sub(&truth, &ev.approximation));
                curve.points.push((probe.m(), ev.estimate, err));
            }
            curves.push(curve);
        }
    }
    Ok(curves)
}

/// Estimator effectivity with the shipped CF pole set.
pub fn check_estimator(fixtures: &Path) -> Check {
    const NAME: &str = "estimator effectivity";
    let path = fixtures.join(ESTIMATOR_FIXTURE);
    if !path.is_file() {
        return Check::failed(
            NAME,
            100.0,
            format!(
                "pole fixture {} not found; point EXPKRYLOV_FIXTURES or --fixtures at the directory holding {ESTIMATOR_FIXTURE} (crates/expkrylov/data/poles in the source tree)",
                path.display()
            ),
        );
    }
    let poles = match formats::load_poles(&path) {
        Ok(p) => p,
        Err(e) => return Check::failed(NAME, 100.0, e.to_string()),
    };
    let curves = match estimator_curves(&poles, 40) {
        Ok(c) => c,
        Err(e) => return Check::failed(NAME, 100.0, e),
    };
    let worst = curves.iter().map(EstimatorCurve::worst_ratio).fold(1.0, f64::max);
    let late: Vec<String> =
        curves.iter().filter(|c| c.first_below(1e-10).is_none()).map(|c| c.label.clone()).collect();
    let reached = curves.iter().filter_map(|c| c.first_below(1e-10)).max();
    let mut check = Check::measured(
        NAME,
        worst,
        100.0,
        format!("6 curves, worst estimate/error factor; below 1e-10 by m = {}", reached.map_or("-".into(), |m| m.to_string())),
    );
    if !late.is_empty() {
        check.passed = false;
        check.detail = format!("not below 1e-10 by m = 40: {}", late.join(", "));
    }
    check
}

/// Second ETD3RK stage from the registry against
/// `e^{-hA/2} u + (h/2) φ_1(-hA/2) g(u)`.
pub fn check_etd3rk_stage2(tableaus: Option<&Path>) -> Check {
    const NAME: &str = "etd3rk stage-2";
    let text = match tableaus {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => return Check::failed(NAME, 1e-10, format!("cannot read tableau file {}: {e}", p.display())),
        },
        None => BUILTIN_TABLEAUS.to_string(),
    };
    let tab = match Registry::parse_unchecked(&text).and_then(|r| r.get("etd3rk").cloned()) {
        Ok(t) => t,
        Err(e) => return Check::failed(NAME, 1e-10, format!("tableau registry: {e}")),
    };
    let nx = 6;
    let a = fd_laplacian_2d(nx, 1.0, BoundaryCondition::Neumann).expect("grid").scaled(0.05);
    let n = a.n();
    let u: Vec<f64> = (0..n).map(|i| (0.3 * i as f64).sin()).collect();
    let g: Vec<f64> = u.iter().map(|x| x - x * x * x).collect();
    let h = 0.4;
    let spec = Spectral::new(&a);
    let want = spec.phi_combination(1.0, h / 2.0, &[vector::to_complex(&u), vector::to_complex(&g)]);
    let input = match tab.nodes().len() {
        3 => stage_to_expmv(&tab, 1, h, &u, std::slice::from_ref(&g)),
        s => return Check::failed(NAME, 1e-10, format!("etd3rk has {s} stages, expected 3")),
    };
    let input = match input {
        Ok(Some(i)) => i,
        Ok(None) => return Check::failed(NAME, 1e-10, "stage 2 has node 0".into()),
        Err(e) => return Check::failed(NAME, 1e-10, e.to_string()),
    };
    let cs: Vec<Vec<C64>> = input.vectors.iter().map(|v| vector::to_complex(v)).collect();
    let poles = PoleSet::repeated_real(1.0, 72).expect("valid poles");
    let opts = ExpmvOptions::rational(PoleKind::RepeatedReal).with_tol(1e-13);
    match expmv_rational(&a, 1.0, &cs, input.h, &poles, &opts, &mut DirectSolver::default()) {
        Ok(rep) => Check::measured(NAME, rel_err(&rep.result, &want), 1e-10, "relative 2-norm vs eigen oracle".into()),
        Err(e) => Check::failed(NAME, 1e-10, e.to_string()),
    }
}

/// `g ≡ 0` integrations against `e^{-TA} u_0` for each integrator and engine.
pub fn check_linear_exactness() -> Check {
    const NAME: &str = "linear exactness";
    let nx = 7;
    let a = fd_laplacian_2d(nx, 1.0, BoundaryCondition::Neumann).expect("grid").scaled(0.02);
    let n = a.n();
    let u0: Vec<f64> = (0..n).map(|i| 1.0 + (0.7 * i as f64).cos()).collect();
    let problem = Problem::linear(a.clone(), u0.clone()).expect("consistent problem");
    let (h, t_end, tol) = (0.25, 1.0, 1e-8);
    let want = vector::real_part(&Spectral::new(&a).apply(|l| (-t_end * l).exp(), &vector::to_complex(&u0)));
    let reg = Registry::builtin();
    let mut worst: f64 = 0.0;
    for method in ["sw2", "etd3rk", "krogstad4"] {
        let tab = reg.get(method).expect("builtin method").clone();
        for rational in [true, false] {
            let out = if rational {
                let poles = PoleSet::repeated_real(1.0, 72).expect("valid poles");
                let opts = ExpmvOptions::rational(PoleKind::RepeatedReal).with_tol(tol);
                let mut engine = RationalEngine::new(poles, opts, DirectSolver::default());
                integrate(&problem, &tab, &u0, 0.0, h, t_end, &mut engine, 1, None)
            } else {
                let mut engine = PolynomialEngine::new(ExpmvOptions::polynomial().with_tol(tol));
                integrate(&problem, &tab, &u0, 0.0, h, t_end, &mut engine, 1, None)
            };
            let traj = match out {
                Ok(t) => t,
                Err(e) => return Check::failed(NAME, 1.0, format!("{method}: {e}")),
            };
            let bound = 10.0 * tol * traj.steps as f64;
            let diff: Vec<f64> = traj.final_state.iter().zip(&want).map(|(x, y)| x - y).collect();
            let err = vector::norm2_real(&diff);
            worst = worst.max(err / bound);
        }
    }
    Check::measured(NAME, worst, 1.0, "error / (10 tol steps), 3 integrators x 2 engines".into())
}
