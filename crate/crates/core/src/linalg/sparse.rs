use alloc::vec::Vec;

use super::{DenseMatrix, LinalgError};
use crate::{math, C64};

/// Real square matrix in CSR form with sorted column indices.
///
/// `id` is an FNV-1a hash of the structure and value bits; it keys solver
/// caches.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
    id: u64,
}

impl SparseOperator {
    /// Assembles from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self, LinalgError> {
        let mut counts = alloc::vec![0usize; n + 1];
        for &(i, j, v) in triplets {
            if i >= n || j >= n || !v.is_finite() {
                return Err(LinalgError::InvalidEntry { row: i, col: j });
            }
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = alloc::vec![0usize; triplets.len()];
        let mut vals = alloc::vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            row.clear();
            row.extend((counts[i]..counts[i + 1]).map(|p| (cols[p], vals[p])));
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut s = 0.0;
                while k < row.len() && row[k].0 == j {
                    s += row[k].1;
                    k += 1;
                }
                col_idx.push(j);
                values.push(s);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self::from_parts(n, row_ptr, col_idx, values))
    }

    /// Validates raw CSR arrays (sorted, in-range, finite).
    pub fn from_csr(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, LinalgError> {
        if row_ptr.len() != n + 1 {
            return Err(LinalgError::DimensionMismatch { expected: n + 1, found: row_ptr.len() });
        }
        if col_idx.len() != values.len() || row_ptr[n] != col_idx.len() || row_ptr[0] != 0 {
            return Err(LinalgError::DimensionMismatch { expected: col_idx.len(), found: values.len() });
        }
        for i in 0..n {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(LinalgError::InvalidEntry { row: i, col: 0 });
            }
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            for (k, &j) in cols.iter().enumerate() {
                let bad_order = k > 0 && cols[k - 1] >= j;
                if j >= n || bad_order || !values[row_ptr[i] + k].is_finite() {
                    return Err(LinalgError::InvalidEntry { row: i, col: j });
                }
            }
        }
        Ok(Self::from_parts(n, row_ptr, col_idx, values))
    }

    fn from_parts(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<f64>) -> Self {
        let mut op = Self { n, row_ptr, col_idx, values, symmetric: false, id: 0 };
        op.symmetric = op.check_symmetric(0.0);
        op.id = op.fingerprint();
        op
    }

    pub fn identity(n: usize) -> Self {
        Self::from_parts(n, (0..=n).collect(), (0..n).collect(), alloc::vec![1.0; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_parts(n, alloc::vec![0; n + 1], Vec::new(), Vec::new())
    }

    /// Constant-coefficient tridiagonal matrix `tridiag(lower, diag, upper)`.
    pub fn tridiagonal(n: usize, lower: f64, diag: f64, upper: f64) -> Self {
        let mut t = Vec::with_capacity(3 * n);
        for i in 0..n {
            if i > 0 {
                t.push((i, i - 1, lower));
            }
            t.push((i, i, diag));
            if i + 1 < n {
                t.push((i, i + 1, upper));
            }
        }
        Self::from_triplets(n, &t).expect("in-range finite triplets")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            out.extend(cols.iter().zip(vals).map(|(&j, &v)| (i, j, v)));
        }
        out
    }

    pub fn spmv(&self, x: &[C64]) -> Result<Vec<C64>, LinalgError> {
        if x.len() != self.n {
            return Err(LinalgError::DimensionMismatch { expected: self.n, found: x.len() });
        }
        let mut y = alloc::vec![C64::new(0.0, 0.0); self.n];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x`; lengths must equal `n`.
    pub fn spmv_into(&self, x: &[C64], y: &mut [C64]) {
        assert!(x.len() == self.n && y.len() == self.n, "spmv dimension mismatch");
        for (i, yi) in y.iter_mut().enumerate() {
            let mut re = 0.0;
            let mut im = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.values[p];
                let xj = x[self.col_idx[p]];
                re += a * xj.re;
                im += a * xj.im;
            }
            *yi = C64::new(re, im);
        }
    }

    pub fn spmv_real(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.n {
            return Err(LinalgError::DimensionMismatch { expected: self.n, found: x.len() });
        }
        let mut y = alloc::vec![0.0; self.n];
        self.spmv_real_into(x, &mut y);
        Ok(y)
    }

    pub fn spmv_real_into(&self, x: &[f64], y: &mut [f64]) {
        assert!(x.len() == self.n && y.len() == self.n, "spmv dimension mismatch");
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[p] * x[self.col_idx[p]];
            }
            *yi = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let values = self.values.iter().map(|v| alpha * v).collect();
        Self::from_parts(self.n, self.row_ptr.clone(), self.col_idx.clone(), values)
    }

    /// `alpha A + beta I`.
    pub fn shifted(&self, alpha: f64, beta: f64) -> Self {
        let mut t: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (i, j, alpha * v)).collect();
        t.extend((0..self.n).map(|i| (i, i, beta)));
        Self::from_triplets(self.n, &t).expect("finite entries")
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.n != other.n {
            return Err(LinalgError::DimensionMismatch { expected: self.n, found: other.n });
        }
        let mut t = self.triplets();
        t.extend(other.triplets());
        Self::from_triplets(self.n, &t)
    }

    /// Kronecker sum `A ⊗ I_b + I_a ⊗ B`; index `(i, j)` maps to `i · n_b + j`.
    pub fn kron_sum(a: &Self, b: &Self) -> Self {
        let (na, nb) = (a.n, b.n);
        let mut t = Vec::with_capacity(a.nnz() * nb + b.nnz() * na);
        for (i, k, v) in a.triplets() {
            for j in 0..nb {
                t.push((i * nb + j, k * nb + j, v));
            }
        }
        for (j, l, v) in b.triplets() {
            for i in 0..na {
                t.push((i * nb + j, i * nb + l, v));
            }
        }
        Self::from_triplets(na * nb, &t).expect("in-range entries")
    }

    /// Block-diagonal matrix `diag(A, B)`.
    pub fn block_diag(a: &Self, b: &Self) -> Self {
        let mut t = a.triplets();
        t.extend(b.triplets().into_iter().map(|(i, j, v)| (i + a.n, j + a.n, v)));
        Self::from_triplets(a.n + b.n, &t).expect("in-range entries")
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).1.iter().map(|v| math::abs(*v)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Gershgorin upper bound on the spectrum of a symmetric operator.
    pub fn gershgorin_upper(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter()
                    .zip(vals)
                    .map(|(&j, &v)| if j == i { v } else { math::abs(v) })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Exact value symmetry up to `tol · max|a_ij|`.
    pub fn check_symmetric(&self, tol: f64) -> bool {
        let scale = self.values.iter().map(|v| math::abs(*v)).fold(0.0, f64::max);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (cj, vj) = self.row(j);
                let w = match cj.binary_search(&i) {
                    Ok(k) => vj[k],
                    Err(_) => return false,
                };
                if math::abs(v - w) > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = C64::new(v, 0.0);
        }
        d
    }

    /// Row-major real dense copy.
    pub fn to_dense_real(&self) -> Vec<f64> {
        let mut d = alloc::vec![0.0; self.n * self.n];
        for (i, j, v) in self.triplets() {
            d[i * self.n + j] = v;
        }
        d
    }

    fn fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(PRIME);
            }
        };
        feed(self.n as u64);
        for &p in &self.row_ptr {
            feed(p as u64);
        }
        for &c in &self.col_idx {
            feed(c as u64);
        }
        for &v in &self.values {
            feed(v.to_bits());
        }
        h
    }
}
