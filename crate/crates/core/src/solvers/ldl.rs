//! Up-looking sparse `L D Lᵀ` for complex-symmetric matrices `ξ I + α A`
//! (no conjugation, no pivoting), following the elimination-tree scheme of
//! Davis' LDL package.

use alloc::vec::Vec;

use super::{check_inputs, Ordering, RealCsr, ShiftedSystemKey, SolverError};
use crate::linalg::SparseOperator;
use crate::C64;

/// Pivots with `|d_k| ≤ tol · max|M_ii|` are rejected.
pub const DEFAULT_PIVOT_TOL: f64 = 1e-14;

const NONE: usize = usize::MAX;

/// Ordering and elimination tree of `A`'s pattern plus the diagonal; shared
/// by every shift of one operator.
#[derive(Clone, Debug)]
pub struct Symbolic {
    operator_id: u64,
    ordering: Ordering,
    pattern: RealCsr,
    diag_pos: Vec<usize>,
    perm: Vec<usize>,
    pinv: Vec<usize>,
    lp: Vec<usize>,
    parent: Vec<usize>,
}

impl Symbolic {
    pub fn operator_id(&self) -> u64 {
        self.operator_id
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    pub fn nnz_l(&self) -> usize {
        self.lp[self.lp.len() - 1]
    }
}

pub fn analyze(a: &SparseOperator, ordering: Ordering) -> Symbolic {
    let n = a.n();
    let pattern = RealCsr::shifted(a, 1.0, 0.0);
    let diag_pos = (0..n)
        .map(|i| {
            (pattern.row_ptr[i]..pattern.row_ptr[i + 1])
                .find(|&p| pattern.col_idx[p] == i)
                .expect("diagonal stored")
        })
        .collect();
    let perm = ordering.permutation(a);
    let mut pinv = alloc::vec![0; n];
    for (k, &i) in perm.iter().enumerate() {
        pinv[i] = k;
    }
    let mut parent = alloc::vec![NONE; n];
    let mut flag = alloc::vec![NONE; n];
    let mut lnz = alloc::vec![0usize; n];
    for k in 0..n {
        flag[k] = k;
        let kk = perm[k];
        for p in pattern.row_ptr[kk]..pattern.row_ptr[kk + 1] {
            let mut i = pinv[pattern.col_idx[p]];
            if i < k {
                while flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
    }
    let mut lp = alloc::vec![0usize; n + 1];
    for k in 0..n {
        lp[k + 1] = lp[k] + lnz[k];
    }
    Symbolic { operator_id: a.id(), ordering, pattern, diag_pos, perm, pinv, lp, parent }
}

/// Numeric factors of one shifted matrix.
#[derive(Clone, Debug)]
pub struct Factorization {
    key: ShiftedSystemKey,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<C64>,
    d: Vec<C64>,
}

impl Factorization {
    pub fn key(&self) -> &ShiftedSystemKey {
        &self.key
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn nnz_l(&self) -> usize {
        self.li.len()
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// Forward and backward substitution.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.d.len();
        assert_eq!(b.len(), n, "factorization solve dimension mismatch");
        let mut y: Vec<C64> = self.perm.iter().map(|&i| b[i]).collect();
        for j in 0..n {
            let yj = y[j];
            for p in self.lp[j]..self.lp[j + 1] {
                y[self.li[p]] -= self.lx[p] * yj;
            }
        }
        for (yj, dj) in y.iter_mut().zip(&self.d) {
            *yj /= dj;
        }
        for j in (0..n).rev() {
            let mut s = y[j];
            for p in self.lp[j]..self.lp[j + 1] {
                s -= self.lx[p] * y[self.li[p]];
            }
            y[j] = s;
        }
        let mut x = alloc::vec![C64::new(0.0, 0.0); n];
        for (k, &i) in self.perm.iter().enumerate() {
            x[i] = y[k];
        }
        x
    }
}

pub fn factorize(a: &SparseOperator, key: &ShiftedSystemKey, ordering: Ordering) -> Result<Factorization, SolverError> {
    let sym = analyze(a, ordering);
    factorize_with(&sym, a, key)
}

/// Numeric factorization of `ξ I + α A` reusing `sym`.
pub fn factorize_with(sym: &Symbolic, a: &SparseOperator, key: &ShiftedSystemKey) -> Result<Factorization, SolverError> {
    check_inputs(a, key, &alloc::vec![C64::new(0.0, 0.0); a.n()])?;
    if sym.operator_id != a.id() {
        return Err(SolverError::OperatorMismatch);
    }
    let n = a.n();
    let pat = &sym.pattern;
    let (pole, alpha) = (key.pole, key.scale);
    let mut values: Vec<C64> = pat.values.iter().map(|&v| C64::new(alpha * v, 0.0)).collect();
    for &p in &sym.diag_pos {
        values[p] += pole;
    }
    let scale = sym.diag_pos.iter().map(|&p| values[p].norm()).fold(0.0, f64::max);
    let tiny = DEFAULT_PIVOT_TOL * scale;

    let lnnz = sym.lp[n];
    let mut li = alloc::vec![0usize; lnnz];
    let mut lx = alloc::vec![C64::new(0.0, 0.0); lnnz];
    let mut d = alloc::vec![C64::new(0.0, 0.0); n];
    let mut y = alloc::vec![C64::new(0.0, 0.0); n];
    let mut pattern = alloc::vec![0usize; n];
    let mut flag = alloc::vec![NONE; n];
    let mut lnz = alloc::vec![0usize; n];
    for k in 0..n {
        let mut top = n;
        flag[k] = k;
        let kk = sym.perm[k];
        for p in pat.row_ptr[kk]..pat.row_ptr[kk + 1] {
            let mut i = sym.pinv[pat.col_idx[p]];
            if i <= k {
                y[i] += values[p];
                let mut len = 0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = sym.parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
        }
        d[k] = y[k];
        y[k] = C64::new(0.0, 0.0);
        while top < n {
            let i = pattern[top];
            top += 1;
            let yi = y[i];
            y[i] = C64::new(0.0, 0.0);
            let p2 = sym.lp[i] + lnz[i];
            for p in sym.lp[i]..p2 {
                y[li[p]] -= lx[p] * yi;
            }
            let l_ki = yi / d[i];
            d[k] -= l_ki * yi;
            li[p2] = k;
            lx[p2] = l_ki;
            lnz[i] += 1;
        }
        let dk = d[k];
        if !(dk.norm() > tiny) || !dk.re.is_finite() || !dk.im.is_finite() {
            return Err(SolverError::SingularPivot { pole, scale: alpha, index: k });
        }
    }
    Ok(Factorization { key: *key, perm: sym.perm.clone(), lp: sym.lp.clone(), li, lx, d })
}
