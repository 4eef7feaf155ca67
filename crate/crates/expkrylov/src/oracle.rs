//! Reference values computed without any Krylov or Padé machinery:
//! symmetric eigendecompositions, scalar φ-functions and truncated Taylor
//! series.

use expkrylov_core::linalg::{DenseMatrix, SparseOperator};
use expkrylov_core::C64;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// `φ_k(z)` for real `z`: Taylor series near 0, the recurrence
/// `φ_{j+1}(z) = (φ_j(z) - 1/j!) / z` elsewhere.
pub fn phi_scalar(k: usize, z: f64) -> f64 {
    if z.abs() < 1.0 {
        let mut term = 1.0 / (1..=k).map(|i| i as f64).product::<f64>();
        let mut sum = term;
        for j in 1..40 {
            term *= z / (j + k) as f64;
            sum += term;
        }
        return sum;
    }
    let mut phi = z.exp();
    let mut fact = 1.0;
    for j in 0..k {
        if j > 0 {
            fact *= j as f64;
        }
        phi = (phi - 1.0 / fact) / z;
    }
    phi
}

/// Eigendecomposition `A = Q Λ Qᵀ` of a symmetric sparse operator.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectral {
    pub fn new(a: &SparseOperator) -> Self {
        let n = a.n();
        let dense = DMatrix::from_row_slice(n, n, &a.to_dense_real());
        let eig = SymmetricEigen::new(dense);
        Self { values: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors }
    }

    /// From known eigenpairs; `vectors` holds eigenvectors as columns.
    pub fn from_parts(values: Vec<f64>, vectors: DMatrix<f64>) -> Self {
        Self { values, vectors }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `Q f(Λ) Qᵀ x`.
    pub fn apply(&self, f: impl Fn(f64) -> f64, x: &[C64]) -> Vec<C64> {
        let re = DVector::from_iterator(x.len(), x.iter().map(|z| z.re));
        let im = DVector::from_iterator(x.len(), x.iter().map(|z| z.im));
        let scale = |v: DVector<f64>| {
            let mut c = self.vectors.tr_mul(&v);
            for (ci, &l) in c.iter_mut().zip(&self.values) {
                *ci *= f(l);
            }
            &self.vectors * c
        };
        let (yr, yi) = (scale(re), scale(im));
        yr.iter().zip(yi.iter()).map(|(&a, &b)| C64::new(a, b)).collect()
    }

    /// `Σ_k h^k φ_k(-h α A) c_k`.
    pub fn phi_combination(&self, alpha: f64, h: f64, cs: &[Vec<C64>]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n()];
        for (k, ck) in cs.iter().enumerate() {
            let y = self.apply(|l| phi_scalar(k, -h * alpha * l), ck);
            let w = h.powi(k as i32);
            for (o, yi) in out.iter_mut().zip(y) {
                *o += yi * w;
            }
        }
        out
    }

    /// `exp(h Ã) c̃` for the augmented operator built from `A`, `α` and
    /// `c_0 … c_p`: the φ-combination on top, `h^{p-i}/(p-i)!` below.
    pub fn augmented_exp(&self, alpha: f64, h: f64, cs: &[Vec<C64>]) -> Vec<C64> {
        let p = cs.len() - 1;
        let mut out = self.phi_combination(alpha, h, cs);
        for i in 0..p {
            let k = p - 1 - i;
            let fact: f64 = (1..=k).map(|j| j as f64).product();
            out.push(C64::new(h.powi(k as i32) / fact, 0.0));
        }
        out
    }
}

/// `exp(Z)` by scaling, a 30-term Taylor series and repeated squaring.
pub fn taylor_expm(z: &DenseMatrix) -> DenseMatrix {
    let norm = z.norm1();
    let s = if norm > 0.25 { (norm / 0.25).log2().ceil() as i32 } else { 0 };
    let zs = z.scaled(C64::new(0.5f64.powi(s), 0.0));
    let n = z.rows();
    let mut sum = DenseMatrix::identity(n);
    let mut term = DenseMatrix::identity(n);
    for j in 1..=30 {
        term = term.matmul(&zs).scaled(C64::new(1.0 / j as f64, 0.0));
        sum = sum.add(&term);
    }
    for _ in 0..s {
        sum = sum.matmul(&sum);
    }
    sum
}

/// Eigenpairs of `tridiag(-1, 2, -1)` of order `n`, eigenvectors as columns.
pub fn laplacian_1d_spectrum(n: usize) -> (Vec<f64>, DMatrix<f64>) {
    let theta = std::f64::consts::PI / (n + 1) as f64;
    let values = (1..=n).map(|k| 2.0 - 2.0 * (k as f64 * theta).cos()).collect();
    let norm = (2.0 / (n + 1) as f64).sqrt();
    let vectors = DMatrix::from_fn(n, n, |j, k| norm * ((j + 1) as f64 * (k + 1) as f64 * theta).sin());
    (values, vectors)
}
