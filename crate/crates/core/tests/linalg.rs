use expkrylov_core::linalg::{
    dense_expm, orthogonal_extend, phi_dense, vector, DenseMatrix, LinalgError, SparseOperator,
};
use expkrylov_core::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn random_dense(rng: &mut ChaCha8Rng, n: usize, norm: f64) -> DenseMatrix {
    let m = DenseMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let s = norm / m.norm1();
    m.scaled(c(s))
}

fn taylor_expm(z: &DenseMatrix, terms: usize) -> DenseMatrix {
    let n = z.rows();
    let mut sum = DenseMatrix::identity(n);
    let mut term = DenseMatrix::identity(n);
    for k in 1..terms {
        term = term.matmul(z).scaled(c(1.0 / k as f64));
        sum = sum.add(&term);
    }
    sum
}

fn rel_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).max_abs() / b.max_abs()
}

#[test]
fn spmv_identity_and_stencil() {
    let id = SparseOperator::identity(3);
    let x = vec![c(1.0), c(2.0), c(3.0)];
    assert_eq!(id.spmv(&x).unwrap(), x);

    let t = SparseOperator::tridiagonal(3, -1.0, 2.0, -1.0);
    let y = t.spmv(&[c(1.0), c(0.0), c(0.0)]).unwrap();
    assert_eq!(y, vec![c(2.0), c(-1.0), c(0.0)]);
}

#[test]
fn spmv_dimension_mismatch() {
    let t = SparseOperator::tridiagonal(3, -1.0, 2.0, -1.0);
    assert!(matches!(t.spmv(&[c(1.0)]), Err(LinalgError::DimensionMismatch { .. })));
}

#[test]
fn spmv_matches_dense_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 50;
    let mut trip = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if rng.random_bool(0.1) {
                trip.push((i, j, rng.random_range(-2.0..2.0)));
            }
        }
    }
    let a = SparseOperator::from_triplets(n, &trip).unwrap();
    let x: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let y = a.spmv(&x).unwrap();
    let dense = a.to_dense();
    let yd = dense.matvec(&x);
    let scale = dense.norm_fro() * vector::norm2(&x);
    for (u, v) in y.iter().zip(&yd) {
        assert!((u - v).norm() <= 1e-13 * scale);
    }
}

#[test]
fn from_triplets_sums_duplicates() {
    let a = SparseOperator::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, 4.0)]).unwrap();
    assert_eq!(a.get(0, 0), 3.0);
    assert_eq!(a.get(1, 0), 4.0);
    assert_eq!(a.nnz(), 2);
    assert!(!a.is_symmetric());
}

#[test]
fn kron_sum_brute_force() {
    let a = SparseOperator::tridiagonal(2, -1.0, 2.0, -3.0);
    let b = SparseOperator::tridiagonal(3, 1.0, 5.0, 7.0);
    let k = SparseOperator::kron_sum(&a, &b).to_dense_real();
    let (da, db) = (a.to_dense_real(), b.to_dense_real());
    for i in 0..2 {
        for j in 0..3 {
            for p in 0..2 {
                for q in 0..3 {
                    let mut want = 0.0;
                    if j == q {
                        want += da[i * 2 + p];
                    }
                    if i == p {
                        want += db[j * 3 + q];
                    }
                    assert_eq!(k[(i * 3 + j) * 6 + p * 3 + q], want);
                }
            }
        }
    }
}

#[test]
fn operator_id_tracks_values() {
    let a = SparseOperator::tridiagonal(4, -1.0, 2.0, -1.0);
    let b = SparseOperator::tridiagonal(4, -1.0, 2.0, -1.0);
    assert_eq!(a.id(), b.id());
    assert_ne!(a.id(), a.scaled(2.0).id());
}

#[test]
fn expm_zero_and_diagonal() {
    let z = DenseMatrix::zeros(4, 4);
    assert_eq!(dense_expm(&z).unwrap(), DenseMatrix::identity(4));
    let d = DenseMatrix::diagonal(&[c(1.0), c(-1.0)]);
    let e = dense_expm(&d).unwrap();
    assert!((e[(0, 0)] - c(core::f64::consts::E)).norm() <= 1e-15 * 3.0);
    assert!((e[(1, 1)] - c(1.0 / core::f64::consts::E)).norm() <= 1e-16 * 3.0);
    assert_eq!(e[(0, 1)], c(0.0));
}

#[test]
fn expm_matches_taylor_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for norm in [0.01, 0.2, 0.9, 1.5, 2.0] {
        let z = random_dense(&mut rng, 8, norm);
        let e = dense_expm(&z).unwrap();
        let t = taylor_expm(&z, 60);
        assert!(rel_diff(&e, &t) <= 1e-12, "norm {norm}: {}", rel_diff(&e, &t));
    }
}

#[test]
fn expm_large_norm_uses_squaring() {
    // exp(diag(-40, 3)) after a similarity transform with a known inverse.
    let p = DenseMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
    let pinv = DenseMatrix::from_real(2, 2, &[1.0, -2.0, 0.0, 1.0]).unwrap();
    let d = DenseMatrix::diagonal(&[c(-40.0), c(3.0)]);
    let z = p.matmul(&d).matmul(&pinv);
    let e = dense_expm(&z).unwrap();
    let want = p.matmul(&DenseMatrix::diagonal(&[c((-40.0f64).exp()), c(3.0f64.exp())])).matmul(&pinv);
    assert!(rel_diff(&e, &want) <= 1e-13);
}

#[test]
fn expm_rejects_oversized_and_nonfinite() {
    let big = DenseMatrix::zeros(513, 513);
    assert!(matches!(dense_expm(&big), Err(LinalgError::TooLarge { .. })));
    let mut bad = DenseMatrix::zeros(2, 2);
    bad[(0, 1)] = C64::new(f64::NAN, 0.0);
    assert_eq!(dense_expm(&bad), Err(LinalgError::NonFinite));
    let mut huge = DenseMatrix::zeros(1, 1);
    huge[(0, 0)] = c(1e6);
    assert_eq!(dense_expm(&huge), Err(LinalgError::Overflow));
}

#[test]
fn phi_at_zero_is_inverse_factorial() {
    let z = DenseMatrix::zeros(3, 3);
    let mut fact = 1.0;
    for k in 0..=4 {
        if k > 0 {
            fact *= k as f64;
        }
        let p = phi_dense(&z, k).unwrap();
        let want = DenseMatrix::identity(3).scaled(c(1.0 / fact));
        assert!(p.sub(&want).max_abs() <= 1e-15, "k = {k}");
    }
}

#[test]
fn phi_one_scalar() {
    let z = DenseMatrix::from_real(1, 1, &[1.0]).unwrap();
    let p = phi_dense(&z, 1).unwrap();
    assert!((p[(0, 0)] - c(core::f64::consts::E - 1.0)).norm() <= 1e-15);
}

#[test]
fn phi_index_bound() {
    let z = DenseMatrix::zeros(2, 2);
    assert_eq!(phi_dense(&z, 9), Err(LinalgError::PhiIndex { k: 9, max: 8 }));
}

#[test]
fn phi_recurrence_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z = random_dense(&mut rng, 6, 3.0);
    let mut fact = 1.0;
    for k in 0..=3 {
        if k > 0 {
            fact *= k as f64;
        }
        let pk = phi_dense(&z, k).unwrap();
        let pk1 = phi_dense(&z, k + 1).unwrap();
        let mut rhs = pk.clone();
        rhs.add_diagonal(c(-1.0 / fact));
        let res = z.matmul(&pk1).sub(&rhs).max_abs();
        assert!(res <= 1e-12, "k = {k}: {res}");
    }
}

#[test]
fn extend_normalizes_first_vector() {
    let e = orthogonal_extend(&[], &[c(3.0), c(0.0), c(0.0)], 1);
    assert_eq!(e.beta, 3.0);
    assert_eq!(e.v_new.unwrap(), vec![c(1.0), c(0.0), c(0.0)]);
}

#[test]
fn extend_detects_dependence() {
    let v = vec![c(0.6), c(0.8), c(0.0)];
    let e = orthogonal_extend(std::slice::from_ref(&v), &v, 1);
    assert!(e.is_breakdown());
    assert!(e.beta <= 1e-12);
    assert!((e.h[0] - c(1.0)).norm() < 1e-15);
}

fn random_orthonormal(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<C64>> {
    let mut basis = Vec::new();
    while basis.len() < k {
        let x: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        if let Some(v) = orthogonal_extend(&basis, &x, 1).v_new {
            basis.push(v);
        }
    }
    basis
}

#[test]
fn extend_random_orthogonality() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let basis = random_orthonormal(&mut rng, 100, 10);
    let x: Vec<C64> = (0..100).map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0)).collect();
    let e = orthogonal_extend(&basis, &x, 1);
    let v = e.v_new.clone().unwrap();
    for b in &basis {
        assert!(vector::dot(b, &v).norm() <= 1e-12);
    }
    // x = V h + beta v
    let mut r = x.clone();
    for (b, h) in basis.iter().zip(&e.h) {
        vector::axpy(-h, b, &mut r);
    }
    vector::axpy(c(-e.beta), &v, &mut r);
    assert!(vector::norm2(&r) <= 1e-13 * vector::norm2(&x));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spmv_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 20;
        let trip: Vec<_> = (0..60).map(|_| (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(-1.0..1.0))).collect();
        let op = SparseOperator::from_triplets(n, &trip).unwrap();
        let x: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let y: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let comb: Vec<C64> = x.iter().zip(&y).map(|(u, v)| u * a + v * b).collect();
        let lhs = op.spmv(&comb).unwrap();
        let (ax, ay) = (op.spmv(&x).unwrap(), op.spmv(&y).unwrap());
        let rhs: Vec<C64> = ax.iter().zip(&ay).map(|(u, v)| u * a + v * b).collect();
        let scale = vector::norm2(&rhs).max(1e-300) + op.norm_inf() * (a.abs() + b.abs()) * 5.0;
        prop_assert!(vector::norm2(&vector::sub(&lhs, &rhs)) <= 1e-13 * scale);
    }

    #[test]
    fn expm_doubling(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..9);
        let norm = rng.random_range(0.01..1.0);
        let z = random_dense(&mut rng, n, norm);
        let e = dense_expm(&z).unwrap();
        let e2 = dense_expm(&z.scaled(c(2.0))).unwrap();
        prop_assert!(rel_diff(&e.matmul(&e), &e2) <= 1e-11);
    }

    #[test]
    fn phi_recurrence(seed in any::<u64>(), k in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..7);
        let norm = rng.random_range(0.0..4.0);
        let z = random_dense(&mut rng, n, norm);
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        let mut rhs = phi_dense(&z, k).unwrap();
        rhs.add_diagonal(c(-1.0 / fact));
        let lhs = z.matmul(&phi_dense(&z, k + 1).unwrap());
        prop_assert!(lhs.sub(&rhs).max_abs() <= 1e-12);
    }

    #[test]
    fn extension_orthogonal(seed in any::<u64>(), k in 0usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = random_orthonormal(&mut rng, 40, k);
        let x: Vec<C64> = (0..40).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let e = orthogonal_extend(&basis, &x, 1);
        let v = e.v_new.unwrap();
        for b in &basis {
            prop_assert!(vector::dot(b, &v).norm() <= 1e-12);
        }
    }
}
