use expkrylov_core::krylov::{
    assemble_augmented, expmv_polynomial, expmv_rational, ExpmvOptions, KrylovError, RationalDecomposition,
};
use expkrylov_core::linalg::{dense_expm, phi_dense, vector, DenseMatrix, SparseOperator};
use expkrylov_core::poles::{Pole, PoleKind, PoleSet};
use expkrylov_core::problems::{fd_laplacian_1d, BoundaryCondition};
use expkrylov_core::solvers::DirectSolver;
use expkrylov_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel_err(x: &[C64], y: &[C64]) -> f64 {
    vector::norm2(&vector::sub(x, y)) / vector::norm2(y)
}

/// Sparse SPD matrix with spectrum roughly in `[0, lambda]`.
fn random_spd(rng: &mut ChaCha8Rng, n: usize, lambda: f64) -> SparseOperator {
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
    let a = SparseOperator::from_triplets(n, &trip).unwrap();
    let s = lambda / a.gershgorin_upper();
    a.scaled(s)
}

fn random_vecs(rng: &mut ChaCha8Rng, count: usize, n: usize, complex: bool) -> Vec<Vec<C64>> {
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| c(rng.random_range(-1.0..1.0), if complex { rng.random_range(-1.0..1.0) } else { 0.0 }))
                .collect()
        })
        .collect()
}

fn dense_truth(aug_dense: &DenseMatrix, h: f64, start: &[C64]) -> Vec<C64> {
    dense_expm(&aug_dense.scaled(c(h, 0.0))).unwrap().matvec(start)
}

/// `Σ_k h^k φ_k(-h α A) c_k` by dense φ-functions.
fn phi_sum(a: &SparseOperator, alpha: f64, h: f64, cs: &[Vec<C64>]) -> Vec<C64> {
    let z = a.to_dense().scaled(c(-h * alpha, 0.0));
    let mut out = vector::zeros(a.n());
    for (k, ck) in cs.iter().enumerate() {
        let y = phi_dense(&z, k).unwrap().matvec(ck);
        vector::axpy(c(h.powi(k as i32), 0.0), &y, &mut out);
    }
    out
}

#[test]
fn no_augmentation_acts_as_scaled_operator() {
    let a = fd_laplacian_1d(6, 1.0, BoundaryCondition::Neumann).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cs = random_vecs(&mut rng, 1, 6, true);
    let (aug, start) = assemble_augmented(&a, 0.4, &cs).unwrap();
    assert_eq!(aug.p(), 0);
    assert_eq!(start, cs[0]);
    let x = &cs[0];
    let mut want = a.spmv(x).unwrap();
    vector::scale(c(-0.4, 0.0), &mut want);
    assert_eq!(aug.apply(x), want);
    assert!(matches!(assemble_augmented(&a, 1.0, &[]), Err(KrylovError::EmptyInput)));
}

#[test]
fn augmented_exponential_gives_phi_combination() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_spd(&mut rng, 5, 4.0);
    let cs = random_vecs(&mut rng, 2, 5, true);
    let h = 0.3;
    let (aug, start) = assemble_augmented(&a, 1.0, &cs).unwrap();
    let full = dense_truth(&aug.to_dense(), h, &start);
    let want = phi_sum(&a, 1.0, h, &cs);
    assert!(rel_err(&full[..5], &want) <= 1e-12);
}

#[test]
fn bottom_block_is_jordan_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_spd(&mut rng, 7, 2.0);
    let cs = random_vecs(&mut rng, 4, 7, false);
    let h = 0.7;
    let (aug, start) = assemble_augmented(&a, 1.0, &cs).unwrap();
    let full = dense_truth(&aug.to_dense(), h, &start);
    let want = [h * h / 2.0, h, 1.0];
    for (got, w) in full[7..].iter().zip(want) {
        assert!((got - c(w, 0.0)).norm() <= 1e-12);
    }
}

#[test]
fn infinite_step_is_polynomial_arnoldi() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = random_spd(&mut rng, 20, 10.0);
    let cs = random_vecs(&mut rng, 2, 20, true);
    let (aug, start) = assemble_augmented(&a, 1.0, &cs).unwrap();
    let mut d = RationalDecomposition::new(&start).unwrap();
    d.step(&aug, Pole::Infinite, &mut DirectSolver::default()).unwrap();
    let k = d.k_matrix();
    assert_eq!(k[(0, 0)], c(1.0, 0.0));
    assert_eq!(k[(1, 0)], c(0.0, 0.0));
    let v1 = &d.basis()[0];
    let x = aug.apply(v1);
    let h = d.h_matrix();
    let mut rebuilt = vector::zeros(21);
    vector::axpy(h[(0, 0)], &d.basis()[0], &mut rebuilt);
    vector::axpy(h[(1, 0)], &d.basis()[1], &mut rebuilt);
    assert!(rel_err(&rebuilt, &x) <= 1e-14);
}

#[test]
fn arnoldi_relation_and_orthonormality() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_spd(&mut rng, 38, 50.0);
    let cs = random_vecs(&mut rng, 3, 38, true);
    let (aug, start) = assemble_augmented(&a, 1.0, &cs).unwrap();
    let mut d = RationalDecomposition::new(&start).unwrap();
    let poles = [
        Pole::Finite(c(2.0, 3.0)),
        Pole::Infinite,
        Pole::Finite(c(0.5, 0.0)),
        Pole::Finite(c(2.0, -3.0)),
        Pole::Finite(c(-4.0, 6.0)),
        Pole::Infinite,
    ];
    let mut solver = DirectSolver::default();
    for p in poles {
        d.step(&aug, p, &mut solver).unwrap();
        let resid = d.relation_residual(&aug);
        let k_norm = d.k_matrix().norm_fro();
        assert!(resid <= 1e-10 * aug.norm_bound() * k_norm, "relation residual {resid}");
        let v = d.basis();
        for i in 0..v.len() {
            for j in 0..v.len() {
                let ip = vector::dot(&v[i], &v[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c(want, 0.0)).norm() <= 1e-10);
            }
        }
    }
}

#[test]
fn nilpotent_operator_breaks_down_at_index() {
    let a = SparseOperator::zeros(6);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cs = random_vecs(&mut rng, 3, 6, false);
    let (aug, start) = assemble_augmented(&a, 1.0, &cs).unwrap();
    for pole in [Pole::Infinite, Pole::Finite(c(1.5, 0.5))] {
        let mut d = RationalDecomposition::new(&start).unwrap();
        let mut solver = DirectSolver::default();
        while !d.is_invariant() {
            d.step(&aug, pole, &mut solver).unwrap();
            assert!(d.m() <= 3);
        }
        assert_eq!(d.m(), 3);
        assert_eq!(d.beta_last(), 0.0);
        assert_eq!(d.error_estimate(1.0).unwrap(), 0.0);
        let truth = dense_truth(&aug.to_dense(), 1.0, &start);
        assert!(rel_err(&d.approximant(1.0).unwrap(), &truth) <= 1e-11);
        assert!(matches!(d.step(&aug, pole, &mut solver), Err(KrylovError::Invariant)));
    }
}

#[test]
fn exact_on_invariant_subspace() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random_spd(&mut rng, 12, 20.0);
    let cs = random_vecs(&mut rng, 2, 12, true);
    let (aug, start) = assemble_augmented(&a, 1.0, &cs).unwrap();
    let mut d = RationalDecomposition::new(&start).unwrap();
    let mut solver = DirectSolver::default();
    let mut i = 0;
    while !d.is_invariant() {
        let pole = if i % 2 == 0 { Pole::Finite(c(3.0, 1.0)) } else { Pole::Infinite };
        d.step(&aug, pole, &mut solver).unwrap();
        i += 1;
        assert!(d.m() <= 14);
    }
    let truth = dense_truth(&aug.to_dense(), 0.8, &start);
    let got = d.approximant(0.8).unwrap();
    assert!(vector::norm2(&vector::sub(&got, &truth)) <= 1e-10 * vector::norm2(&start));
}

#[test]
fn zero_time_returns_start_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = random_spd(&mut rng, 15, 5.0);
    let cs = random_vecs(&mut rng, 3, 15, true);
    let (aug, start) = assemble_augmented(&a, 1.0, &cs).unwrap();
    let mut d = RationalDecomposition::new(&start).unwrap();
    let mut solver = DirectSolver::default();
    for p in [Pole::Finite(c(1.0, 2.0)), Pole::Finite(c(1.0, -2.0)), Pole::Infinite] {
        d.step(&aug, p, &mut solver).unwrap();
    }
    assert!(rel_err(&d.approximant(0.0).unwrap(), &start) <= 1e-14);
    assert_eq!(d.error_estimate(0.0).unwrap(), 0.0);
}

#[test]
fn expansion_leading_term_is_the_estimate() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = random_spd(&mut rng, 30, 40.0);
    let cs = random_vecs(&mut rng, 2, 30, true);
    let (aug, start) = assemble_augmented(&a, 1.0, &cs).unwrap();
    let mut d = RationalDecomposition::new(&start).unwrap();
    let mut solver = DirectSolver::default();
    for p in [Pole::Finite(c(4.0, 0.0)), Pole::Finite(c(4.0, 0.0)), Pole::Infinite] {
        d.step(&aug, p, &mut solver).unwrap();
    }
    let est = d.error_estimate(0.5).unwrap();
    assert!(est > 0.0);
    assert_eq!(d.full_error_expansion(&aug, 0.5, 1).unwrap(), est);
    assert!(d.full_error_expansion(&aug, 0.5, 0).is_err());
}

#[test]
fn expansion_with_thirty_terms_matches_true_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let a = random_spd(&mut rng, 38, 6.0);
    let cs = random_vecs(&mut rng, 3, 38, true);
    let (aug, start) = assemble_augmented(&a, 1.0, &cs).unwrap();
    let h = 0.5;
    let truth = dense_truth(&aug.to_dense(), h, &start);
    let mut d = RationalDecomposition::new(&start).unwrap();
    let mut solver = DirectSolver::default();
    for p in [Pole::Finite(c(2.0, 1.0)), Pole::Finite(c(2.0, -1.0)), Pole::Finite(c(1.0, 0.0)), Pole::Infinite] {
        d.step(&aug, p, &mut solver).unwrap();
    }
    let err = vector::norm2(&vector::sub(&truth, &d.approximant(h).unwrap()));
    let series = d.full_error_expansion(&aug, h, 30).unwrap();
    assert!((series - err).abs() <= 1e-10 * err.max(1e-300), "series {series} vs true {err}");
    let mut prev = 0.0;
    let mut diffs = Vec::new();
    for terms in 1..=30 {
        let s = d.full_error_expansion(&aug, h, terms).unwrap();
        diffs.push((s - prev).abs());
        prev = s;
    }
    for w in diffs[8..].windows(2) {
        assert!(w[1] <= w[0] + 1e-15 * err);
    }
}

#[test]
fn estimator_tracks_true_error() {
    let n = 200;
    let a = fd_laplacian_1d(n, 1.0, BoundaryCondition::Dirichlet).unwrap();
    let lmax = a.gershgorin_upper();
    let a = a.scaled(999.0 / lmax).shifted(1.0, 1.0);
    let poles = PoleSet::repeated_real(10.0, 60).unwrap();
    let start = vec![c(1.0 / (n as f64).sqrt(), 0.0); n];
    let (aug, s) = assemble_augmented(&a, 1.0, &[start]).unwrap();
    let truth = dense_truth(&aug.to_dense(), 1.0, &s);
    let mut d = RationalDecomposition::new(&s).unwrap();
    let mut solver = DirectSolver::default();
    let mut checked = 0;
    for m in 0..40 {
        d.step(&aug, poles.get(m), &mut solver).unwrap();
        let mut probe = d.clone();
        probe.step(&aug, Pole::Infinite, &mut solver).unwrap();
        let ev = probe.evaluate(1.0).unwrap();
        let err = vector::norm2(&vector::sub(&truth, &ev.approximation));
        if (1e-12..=1e-1).contains(&err) {
            let ratio = ev.estimate / err;
            assert!((0.01..=100.0).contains(&ratio), "m = {m}: estimate {} vs error {err}", ev.estimate);
            checked += 1;
        }
    }
    assert!(checked >= 5);
}

#[test]
fn rational_expmv_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = random_spd(&mut rng, 50, 200.0);
    let cs = random_vecs(&mut rng, 3, 50, false);
    let h = 0.1;
    let want = phi_sum(&a, 1.0, h, &cs);
    let poles = PoleSet::repeated_real(2.0, 72).unwrap();
    let opts = ExpmvOptions::rational(PoleKind::RepeatedReal);
    let rep = expmv_rational(&a, 1.0, &cs, h, &poles, &opts, &mut DirectSolver::default()).unwrap();
    assert!(rep.converged);
    assert!(rep.final_estimate() <= opts.tol);
    assert!(rel_err(&rep.result, &want) <= 1e-7, "{}", rel_err(&rep.result, &want));
    assert_eq!(rep.solver_iterations.len(), rep.poles_consumed);
}

#[test]
fn polynomial_expmv_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let a = random_spd(&mut rng, 50, 200.0);
    let cs = random_vecs(&mut rng, 3, 50, false);
    let h = 0.1;
    let want = phi_sum(&a, 1.0, h, &cs);
    let rep = expmv_polynomial(&a, 1.0, &cs, h, &ExpmvOptions::polynomial()).unwrap();
    assert!(rel_err(&rep.result, &want) <= 1e-7);
    assert_eq!(rep.poles_consumed, 0);
}

#[test]
fn polynomial_substeps_on_stiff_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let a = random_spd(&mut rng, 50, 5000.0);
    let cs = random_vecs(&mut rng, 2, 50, false);
    let h = 1.0;
    let want = phi_sum(&a, 1.0, h, &cs);
    let opts = ExpmvOptions { m_max: 30, ..ExpmvOptions::polynomial() };
    let rep = expmv_polynomial(&a, 1.0, &cs, h, &opts).unwrap();
    assert!(rep.substeps > 1);
    assert!(vector::norm2(&vector::sub(&rep.result, &want)) <= 1e-7 * vector::norm2(&want).max(1.0));
}

#[test]
fn all_infinite_rational_equals_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let a = random_spd(&mut rng, 40, 30.0);
    let cs = random_vecs(&mut rng, 2, 40, true);
    let opts = ExpmvOptions::polynomial();
    let only_inf = PoleSet::repeated_real(1.0, 1).unwrap();
    let poly = expmv_polynomial(&a, 1.0, &cs, 0.2, &opts).unwrap();
    assert_eq!(poly.substeps, 1);
    let rat = expmv_rational(&a, 1.0, &cs, 0.2, &only_inf, &ExpmvOptions { m_min: 1, ..opts }, &mut DirectSolver::default());
    assert!(rat.is_ok());
    let mut d_rat = RationalDecomposition::new(&assemble_augmented(&a, 0.2, &scaled(&cs, 0.2)).unwrap().1).unwrap();
    let (aug, _) = assemble_augmented(&a, 0.2, &scaled(&cs, 0.2)).unwrap();
    for _ in 0..poly.dimension {
        d_rat.step(&aug, Pole::Infinite, &mut DirectSolver::default()).unwrap();
    }
    let direct = d_rat.approximant(1.0).unwrap();
    assert!(rel_err(&poly.result, &direct[..40]) <= 1e-12);
}

fn scaled(cs: &[Vec<C64>], h: f64) -> Vec<Vec<C64>> {
    cs.iter().enumerate().map(|(k, v)| v.iter().map(|z| z * h.powi(k as i32)).collect()).collect()
}

#[test]
fn zero_step_returns_first_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let a = random_spd(&mut rng, 20, 10.0);
    let cs = random_vecs(&mut rng, 3, 20, true);
    let poles = PoleSet::repeated_real(1.0, 10).unwrap();
    let opts = ExpmvOptions::rational(PoleKind::RepeatedReal);
    let rep = expmv_rational(&a, 1.0, &cs, 0.0, &poles, &opts, &mut DirectSolver::default()).unwrap();
    assert!(rel_err(&rep.result, &cs[0]) <= 1e-14);
    assert_eq!(rep.final_estimate(), 0.0);
    assert_eq!(rep.dimension, opts.m_min);
}

#[test]
fn phi_identity_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let poles = PoleSet::repeated_real(1.0, 72).unwrap();
    for trial in 0..12 {
        let n = rng.random_range(10..=56);
        let p = trial % 4;
        let lambda = rng.random_range(1.0..100.0);
        let a = random_spd(&mut rng, n, lambda);
        let cs = random_vecs(&mut rng, p + 1, n, trial % 2 == 0);
        let h = rng.random_range(0.05..1.0);
        let want = phi_sum(&a, 1.0, h, &cs);
        let opts = ExpmvOptions::rational(PoleKind::RepeatedReal).with_tol(1e-12 * vector::norm2(&want));
        let rep = expmv_rational(&a, 1.0, &cs, h, &poles, &opts, &mut DirectSolver::default()).unwrap();
        assert!(rel_err(&rep.result, &want) <= 1e-9, "trial {trial}: {}", rel_err(&rep.result, &want));
    }
}

#[test]
fn conjugate_pairs_give_real_results() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let a = random_spd(&mut rng, 40, 300.0);
    let cs = random_vecs(&mut rng, 2, 40, false);
    let list = vec![c(3.0, 2.0), c(3.0, -2.0), c(1.0, 5.0), c(1.0, -5.0), c(6.0, 0.0), c(2.0, 8.0), c(2.0, -8.0)];
    let poles = PoleSet::from_list(list, PoleKind::Complex, None).unwrap();
    let opts = ExpmvOptions { m_min: 3, cadence: 1, ..ExpmvOptions::rational(PoleKind::Complex) };
    let rep = expmv_rational(&a, 1.0, &cs, 0.5, &poles, &opts, &mut DirectSolver::default()).unwrap();
    assert!(rep.imaginary_residue() <= 1e-9, "{}", rep.imaginary_residue());
}

#[test]
fn hard_cap_flags_nonconvergence() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let a = random_spd(&mut rng, 60, 1e4);
    let cs = random_vecs(&mut rng, 1, 60, false);
    let poles = PoleSet::repeated_real(1e5, 72).unwrap();
    let opts = ExpmvOptions { tol: 1e-14, m_min: 3, m_max: 6, cadence: 1, reorth: 1 };
    let rep = expmv_rational(&a, 1.0, &cs, 1.0, &poles, &opts, &mut DirectSolver::default()).unwrap();
    assert!(!rep.converged);
    assert_eq!(rep.dimension, 6);
    assert!(rep.final_estimate() > opts.tol);
}

#[test]
fn invalid_options_are_rejected() {
    let a = fd_laplacian_1d(5, 1.0, BoundaryCondition::Dirichlet).unwrap();
    let cs = vec![vec![c(1.0, 0.0); 5]];
    let poles = PoleSet::repeated_real(1.0, 3).unwrap();
    let mut s = DirectSolver::default();
    let bad = ExpmvOptions { m_min: 10, m_max: 5, ..ExpmvOptions::polynomial() };
    assert!(expmv_rational(&a, 1.0, &cs, 1.0, &poles, &bad, &mut s).is_err());
    let bad_tol = ExpmvOptions::polynomial().with_tol(0.0);
    assert!(expmv_polynomial(&a, 1.0, &cs, 1.0, &bad_tol).is_err());
    assert!(expmv_polynomial(&a, 1.0, &cs, -1.0, &ExpmvOptions::polynomial()).is_err());
    let wrong = vec![vec![c(1.0, 0.0); 4]];
    assert!(matches!(
        expmv_polynomial(&a, 1.0, &wrong, 1.0, &ExpmvOptions::polynomial()),
        Err(KrylovError::DimensionMismatch { .. })
    ));
}
