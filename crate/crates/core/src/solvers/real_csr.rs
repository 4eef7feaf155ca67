use alloc::vec::Vec;

use crate::linalg::SparseOperator;
use crate::C64;

/// Rectangular real CSR matrix used inside the preconditioners.
#[derive(Clone, Debug, PartialEq)]
pub struct RealCsr {
    pub rows: usize,
    pub cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl RealCsr {
    /// `shift I + scale A` with every diagonal entry stored.
    pub fn shifted(a: &SparseOperator, scale: f64, shift: f64) -> Self {
        let n = a.n();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(a.nnz() + n);
        let mut values = Vec::with_capacity(a.nnz() + n);
        row_ptr.push(0);
        for i in 0..n {
            let (cols, vals) = a.row(i);
            let mut diag_done = false;
            for (&j, &v) in cols.iter().zip(vals) {
                if j > i && !diag_done {
                    col_idx.push(i);
                    values.push(shift);
                    diag_done = true;
                }
                if j == i {
                    col_idx.push(i);
                    values.push(scale * v + shift);
                    diag_done = true;
                } else {
                    col_idx.push(j);
                    values.push(scale * v);
                }
            }
            if !diag_done {
                col_idx.push(i);
                values.push(shift);
            }
            row_ptr.push(col_idx.len());
        }
        Self { rows: n, cols: n, row_ptr, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| {
                let r = self.row_ptr[i]..self.row_ptr[i + 1];
                self.col_idx[r.clone()]
                    .iter()
                    .zip(&self.values[r])
                    .find(|(&j, _)| j == i)
                    .map_or(0.0, |(_, &v)| v)
            })
            .collect()
    }

    pub fn spmv(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let v = self.values[p];
                let xj = x[self.col_idx[p]];
                re += v * xj.re;
                im += v * xj.im;
            }
            *yi = C64::new(re, im);
        }
    }

    /// `y += A x`.
    pub fn spmv_add(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let v = self.values[p];
                let xj = x[self.col_idx[p]];
                re += v * xj.re;
                im += v * xj.im;
            }
            *yi += C64::new(re, im);
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = alloc::vec![0usize; self.cols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_idx = alloc::vec![0; self.nnz()];
        let mut values = alloc::vec![0.0; self.nnz()];
        for i in 0..self.rows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p];
                col_idx[next[j]] = i;
                values[next[j]] = self.values[p];
                next[j] += 1;
            }
        }
        Self { rows: self.cols, cols: self.rows, row_ptr: counts, col_idx, values }
    }

    /// Sparse product with a dense accumulator; columns come out sorted.
    pub fn matmul(&self, b: &Self) -> Self {
        assert_eq!(self.cols, b.rows);
        let mut acc = alloc::vec![0.0; b.cols];
        let mut mark = alloc::vec![usize::MAX; b.cols];
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut touched = Vec::new();
        row_ptr.push(0);
        for i in 0..self.rows {
            touched.clear();
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let (k, a) = (self.col_idx[p], self.values[p]);
                for q in b.row_ptr[k]..b.row_ptr[k + 1] {
                    let j = b.col_idx[q];
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b.values[q];
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_idx.push(j);
                values.push(acc[j]);
            }
            row_ptr.push(col_idx.len());
        }
        Self { rows: self.rows, cols: b.cols, row_ptr, col_idx, values }
    }
}
