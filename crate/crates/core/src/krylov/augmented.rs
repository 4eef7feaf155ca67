use alloc::vec::Vec;

use super::KrylovError;
use crate::linalg::{vector, DenseMatrix, SparseOperator};
use crate::C64;

/// `Ã = [[-α A, C], [0, J_p]]` applied implicitly. `C` holds the columns
/// `[c_p, …, c_1]` and `J_p` is the nilpotent shift `(J x)_i = x_{i+1}`.
#[derive(Clone, Debug)]
pub struct AugmentedOperator<'a> {
    a: &'a SparseOperator,
    scale: f64,
    c: Vec<Vec<C64>>,
}

/// Builds `Ã` and `c̃ = (c_0; e_p)` from `[c_0, …, c_p]`.
pub fn assemble_augmented<'a>(
    a: &'a SparseOperator,
    scale: f64,
    c_vectors: &[Vec<C64>],
) -> Result<(AugmentedOperator<'a>, Vec<C64>), KrylovError> {
    let (c0, rest) = c_vectors.split_first().ok_or(KrylovError::EmptyInput)?;
    let n = a.n();
    for c in c_vectors {
        if c.len() != n {
            return Err(KrylovError::DimensionMismatch { expected: n, found: c.len() });
        }
    }
    let p = rest.len();
    let c: Vec<Vec<C64>> = rest.iter().rev().cloned().collect();
    let mut start = c0.clone();
    start.extend((0..p).map(|i| C64::new(if i + 1 == p { 1.0 } else { 0.0 }, 0.0)));
    Ok((AugmentedOperator { a, scale, c }, start))
}

impl<'a> AugmentedOperator<'a> {
    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn p(&self) -> usize {
        self.c.len()
    }

    pub fn dim(&self) -> usize {
        self.n() + self.p()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn operator(&self) -> &'a SparseOperator {
        self.a
    }

    /// Columns of `C` in storage order `[c_p, …, c_1]`.
    pub fn c_columns(&self) -> &[Vec<C64>] {
        &self.c
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let (n, p) = (self.n(), self.p());
        assert_eq!(x.len(), n + p, "augmented operator dimension mismatch");
        let mut y = vector::zeros(n + p);
        self.a.spmv_into(&x[..n], &mut y[..n]);
        for yi in &mut y[..n] {
            *yi *= -self.scale;
        }
        for (col, xj) in self.c.iter().zip(&x[n..]) {
            vector::axpy(*xj, col, &mut y[..n]);
        }
        for i in 0..p.saturating_sub(1) {
            y[n + i] = x[n + i + 1];
        }
        y
    }

    /// Upper bound for `‖Ã‖_∞`.
    pub fn norm_bound(&self) -> f64 {
        let c_max = (0..self.n())
            .map(|i| self.c.iter().map(|c| c[i].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        self.scale * self.a.norm_inf() + c_max + if self.p() > 1 { 1.0 } else { 0.0 }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let (n, p) = (self.n(), self.p());
        let mut m = DenseMatrix::zeros(n + p, n + p);
        for (i, j, v) in self.a.triplets() {
            m[(i, j)] = C64::new(-self.scale * v, 0.0);
        }
        for (j, col) in self.c.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m[(i, n + j)] = *v;
            }
        }
        for i in 0..p.saturating_sub(1) {
            m[(n + i, n + i + 1)] = C64::new(1.0, 0.0);
        }
        m
    }
}
