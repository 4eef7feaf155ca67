use alloc::vec::Vec;

use super::{RealCsr, SolverError};
use crate::C64;

/// Zero-fill incomplete LU of a real matrix with stored diagonal. `L` is
/// unit lower triangular; both factors share the input pattern.
#[derive(Clone, Debug)]
pub struct Ilu0 {
    lu: RealCsr,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(m: &RealCsr) -> Result<Self, SolverError> {
        let n = m.rows;
        let mut lu = m.clone();
        let diag: Vec<usize> = (0..n)
            .map(|i| {
                (lu.row_ptr[i]..lu.row_ptr[i + 1])
                    .find(|&p| lu.col_idx[p] == i)
                    .ok_or(SolverError::InvalidConfig("ILU(0) needs a stored diagonal"))
            })
            .collect::<Result<_, _>>()?;
        let mut pos = alloc::vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for p in start..end {
                pos[lu.col_idx[p]] = p;
            }
            for p in start..diag[i] {
                let k = lu.col_idx[p];
                let pivot = lu.values[diag[k]];
                if pivot == 0.0 {
                    return Err(SolverError::InvalidConfig("zero pivot in ILU(0)"));
                }
                let lik = lu.values[p] / pivot;
                lu.values[p] = lik;
                for q in diag[k] + 1..lu.row_ptr[k + 1] {
                    let j = lu.col_idx[q];
                    let target = pos[j];
                    if target != usize::MAX {
                        lu.values[target] -= lik * lu.values[q];
                    }
                }
            }
            for p in start..end {
                pos[lu.col_idx[p]] = usize::MAX;
            }
            if lu.values[diag[i]] == 0.0 {
                return Err(SolverError::InvalidConfig("zero pivot in ILU(0)"));
            }
        }
        Ok(Self { lu, diag })
    }

    /// `z = (L U)^{-1} r`.
    pub fn apply(&self, r: &[C64], z: &mut [C64]) {
        let lu = &self.lu;
        let n = lu.rows;
        for i in 0..n {
            let mut s = r[i];
            for p in lu.row_ptr[i]..self.diag[i] {
                s -= z[lu.col_idx[p]] * lu.values[p];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for p in self.diag[i] + 1..lu.row_ptr[i + 1] {
                s -= z[lu.col_idx[p]] * lu.values[p];
            }
            z[i] = s / lu.values[self.diag[i]];
        }
    }
}
