//! Scaling and squaring with diagonal Padé approximants (Higham 2005) and
//! φ-functions through one augmented block exponential.

use super::{DenseMatrix, LinalgError, DEFAULT_DENSE_CAP};
use crate::{math, C64};

/// Largest φ index accepted by [`phi_dense`].
pub const DEFAULT_MAX_PHI: usize = 8;

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `e^Z` for a square matrix of dimension at most [`DEFAULT_DENSE_CAP`].
pub fn dense_expm(z: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    z.check_cap(DEFAULT_DENSE_CAP)?;
    expm(z)
}

pub(crate) fn expm(z: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    if !z.is_square() {
        return Err(LinalgError::DimensionMismatch { expected: z.rows(), found: z.cols() });
    }
    if !z.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = z.rows();
    if n == 0 {
        return Ok(DenseMatrix::zeros(0, 0));
    }
    let eta = z.norm1();
    for (degree, theta) in THETA {
        if eta <= theta {
            let coeffs: &[f64] = match degree {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(z, coeffs);
        }
    }
    let s = math::ceil(math::log2(eta / THETA_13)).max(0.0);
    if s > 1000.0 {
        return Err(LinalgError::Overflow);
    }
    let s = s as i32;
    let scaled = z.scaled(C64::new(math::powi(2.0, -s), 0.0));
    let mut x = pade13(&scaled)?;
    for _ in 0..s {
        x = x.matmul(&x);
    }
    if !x.is_finite() {
        return Err(LinalgError::Overflow);
    }
    Ok(x)
}

fn scaled_identity(n: usize, a: f64) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    m.add_diagonal(C64::new(a, 0.0));
    m
}

fn axpy_mat(acc: &mut DenseMatrix, a: f64, x: &DenseMatrix) {
    *acc = acc.add(&x.scaled(C64::new(a, 0.0)));
}

fn pade_low(z: &DenseMatrix, b: &[f64]) -> Result<DenseMatrix, LinalgError> {
    let n = z.rows();
    let z2 = z.matmul(z);
    // Even powers Z^{2k}, k = 0..=deg/2.
    let mut powers = alloc::vec![DenseMatrix::identity(n), z2.clone()];
    while powers.len() * 2 < b.len() {
        let next = powers[powers.len() - 1].matmul(&z2);
        powers.push(next);
    }
    let mut u = DenseMatrix::zeros(n, n);
    let mut v = DenseMatrix::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        if 2 * k + 1 < b.len() {
            axpy_mat(&mut u, b[2 * k + 1], p);
        }
        axpy_mat(&mut v, b[2 * k], p);
    }
    let u = z.matmul(&u);
    finish_pade(&u, &v)
}

fn pade13(z: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let n = z.rows();
    let b = &B13;
    let z2 = z.matmul(z);
    let z4 = z2.matmul(&z2);
    let z6 = z4.matmul(&z2);
    let ident = |a: f64| scaled_identity(n, a);

    let mut inner = z6.scaled(C64::new(b[13], 0.0));
    axpy_mat(&mut inner, b[11], &z4);
    axpy_mat(&mut inner, b[9], &z2);
    let mut u = z6.matmul(&inner);
    axpy_mat(&mut u, b[7], &z6);
    axpy_mat(&mut u, b[5], &z4);
    axpy_mat(&mut u, b[3], &z2);
    u = u.add(&ident(b[1]));
    let u = z.matmul(&u);

    let mut inner = z6.scaled(C64::new(b[12], 0.0));
    axpy_mat(&mut inner, b[10], &z4);
    axpy_mat(&mut inner, b[8], &z2);
    let mut v = z6.matmul(&inner);
    axpy_mat(&mut v, b[6], &z6);
    axpy_mat(&mut v, b[4], &z4);
    axpy_mat(&mut v, b[2], &z2);
    v = v.add(&ident(b[0]));
    finish_pade(&u, &v)
}

/// Solves `(V - U) X = V + U`.
fn finish_pade(u: &DenseMatrix, v: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let lu = v.sub(u).lu().map_err(|_| LinalgError::Overflow)?;
    Ok(lu.solve_matrix(&v.add(u)))
}

/// `φ_k(Z)` with `k ≤` [`DEFAULT_MAX_PHI`].
pub fn phi_dense(z: &DenseMatrix, k: usize) -> Result<DenseMatrix, LinalgError> {
    phi_dense_capped(z, k, DEFAULT_MAX_PHI)
}

/// `φ_k(Z)` with a caller-chosen bound on `k`.
///
/// The top-right `m × m` block of `exp` of the block matrix
/// `[[Z, I, 0, …], [0, 0, I, …], …, [0, …, 0]]` with `k + 1` block rows
/// equals `φ_k(Z)`.
pub fn phi_dense_capped(z: &DenseMatrix, k: usize, max_k: usize) -> Result<DenseMatrix, LinalgError> {
    if k > max_k {
        return Err(LinalgError::PhiIndex { k, max: max_k });
    }
    z.check_cap(DEFAULT_DENSE_CAP)?;
    if !z.is_square() {
        return Err(LinalgError::DimensionMismatch { expected: z.rows(), found: z.cols() });
    }
    if k == 0 {
        return expm(z);
    }
    let m = z.rows();
    let big = m * (k + 1);
    let mut w = DenseMatrix::zeros(big, big);
    w.set_block(0, 0, z);
    for b in 0..k {
        for i in 0..m {
            w[(b * m + i, (b + 1) * m + i)] = C64::new(1.0, 0.0);
        }
    }
    let e = expm(&w)?;
    Ok(e.block(0, k * m, m, m))
}
