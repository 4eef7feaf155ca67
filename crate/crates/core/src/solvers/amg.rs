//! Smoothed-aggregation AMG for real SPD matrices, applied as one
//! symmetric V-cycle to complex vectors.

use alloc::vec::Vec;

use super::RealCsr;
use crate::linalg::{vector, DenseLu, DenseMatrix};
use crate::math;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmgOptions {
    /// Strength threshold: `|a_ij| ≥ θ sqrt(|a_ii a_jj|)`.
    pub strength: f64,
    pub max_levels: usize,
    /// Levels at or below this size are solved densely.
    pub coarse_size: usize,
    /// Coarsening stops when `n_c / n` exceeds this ratio.
    pub stall_ratio: f64,
    /// Symmetric Gauss–Seidel sweeps on a stalled coarsest level.
    pub coarse_sweeps: usize,
}

impl Default for AmgOptions {
    fn default() -> Self {
        Self { strength: 0.08, max_levels: 12, coarse_size: 100, stall_ratio: 0.9, coarse_sweeps: 8 }
    }
}

#[derive(Clone, Debug)]
struct Level {
    a: RealCsr,
    diag: Vec<f64>,
    p: RealCsr,
    r: RealCsr,
}

#[derive(Clone, Debug)]
enum Coarsest {
    Dense(DenseLu),
    Relax(RealCsr, Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct Amg {
    levels: Vec<Level>,
    coarsest: Coarsest,
    sweeps: usize,
}

impl Amg {
    pub fn new(m: &RealCsr, opts: &AmgOptions) -> Self {
        let mut levels = Vec::new();
        let mut a = m.clone();
        loop {
            let n = a.rows;
            if n <= opts.coarse_size || levels.len() + 1 >= opts.max_levels {
                break;
            }
            let (agg, nc) = aggregate(&a, opts.strength);
            if nc == 0 || nc as f64 > opts.stall_ratio * n as f64 {
                break;
            }
            let p = smoothed_prolongator(&a, &agg, nc);
            let r = p.transpose();
            let coarse = r.matmul(&a).matmul(&p);
            let diag = a.diagonal();
            levels.push(Level { a, diag, p, r });
            a = coarse;
        }
        let coarsest = if a.rows <= opts.coarse_size {
            let dense = to_dense(&a);
            match dense.lu() {
                Ok(lu) => Coarsest::Dense(lu),
                Err(_) => Coarsest::Relax(a.clone(), a.diagonal()),
            }
        } else {
            let d = a.diagonal();
            Coarsest::Relax(a, d)
        };
        Self { levels, coarsest, sweeps: opts.coarse_sweeps }
    }

    pub fn levels(&self) -> usize {
        self.levels.len() + 1
    }

    /// One V-cycle from a zero initial guess.
    pub fn apply(&self, r: &[C64], z: &mut [C64]) {
        let x = self.cycle(0, r);
        z.copy_from_slice(&x);
    }

    fn cycle(&self, level: usize, b: &[C64]) -> Vec<C64> {
        if level == self.levels.len() {
            return match &self.coarsest {
                Coarsest::Dense(lu) => lu.solve(b),
                Coarsest::Relax(a, d) => {
                    let mut x = vector::zeros(b.len());
                    for _ in 0..self.sweeps {
                        gauss_seidel(a, d, b, &mut x, false);
                        gauss_seidel(a, d, b, &mut x, true);
                    }
                    x
                }
            };
        }
        let lv = &self.levels[level];
        let mut x = vector::zeros(b.len());
        gauss_seidel(&lv.a, &lv.diag, b, &mut x, false);
        let mut res = vector::zeros(b.len());
        lv.a.spmv(&x, &mut res);
        for (ri, bi) in res.iter_mut().zip(b) {
            *ri = *bi - *ri;
        }
        let mut rc = vector::zeros(lv.r.rows);
        lv.r.spmv(&res, &mut rc);
        let ec = self.cycle(level + 1, &rc);
        lv.p.spmv_add(&ec, &mut x);
        gauss_seidel(&lv.a, &lv.diag, b, &mut x, true);
        x
    }
}

fn gauss_seidel(a: &RealCsr, diag: &[f64], b: &[C64], x: &mut [C64], backward: bool) {
    let n = a.rows;
    let mut sweep = |i: usize| {
        let mut s = b[i];
        for p in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.col_idx[p];
            if j != i {
                s -= x[j] * a.values[p];
            }
        }
        if diag[i] != 0.0 {
            x[i] = s / diag[i];
        }
    };
    if backward {
        (0..n).rev().for_each(&mut sweep);
    } else {
        (0..n).for_each(&mut sweep);
    }
}

const UNAGG: usize = usize::MAX;
const ISOLATED: usize = usize::MAX - 1;

/// Greedy three-phase aggregation on the strength graph. Nodes without
/// strong neighbours stay out of every aggregate.
fn aggregate(a: &RealCsr, theta: f64) -> (Vec<usize>, usize) {
    let n = a.rows;
    let d = a.diagonal();
    let strong: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (a.row_ptr[i]..a.row_ptr[i + 1])
                .filter(|&p| {
                    let j = a.col_idx[p];
                    j != i && math::abs(a.values[p]) >= theta * math::sqrt(math::abs(d[i] * d[j]))
                })
                .map(|p| a.col_idx[p])
                .collect()
        })
        .collect();
    let mut agg = alloc::vec![UNAGG; n];
    let mut nc = 0;
    for i in 0..n {
        if strong[i].is_empty() {
            agg[i] = ISOLATED;
        }
    }
    for i in 0..n {
        if agg[i] == UNAGG && strong[i].iter().all(|&j| agg[j] == UNAGG || agg[j] == ISOLATED) {
            agg[i] = nc;
            for &j in &strong[i] {
                if agg[j] == UNAGG {
                    agg[j] = nc;
                }
            }
            nc += 1;
        }
    }
    let snapshot = agg.clone();
    for i in 0..n {
        if agg[i] == UNAGG {
            if let Some(&j) = strong[i].iter().find(|&&j| snapshot[j] < nc) {
                agg[i] = snapshot[j];
            }
        }
    }
    for i in 0..n {
        if agg[i] == UNAGG {
            agg[i] = nc;
            for &j in &strong[i] {
                if agg[j] == UNAGG {
                    agg[j] = nc;
                }
            }
            nc += 1;
        }
    }
    (agg, nc)
}

/// `P = (I - ω D⁻¹ A) P_tent` with `ω = 4 / (3 ρ(D⁻¹ A))`, `ρ` bounded by
/// Gershgorin.
fn smoothed_prolongator(a: &RealCsr, agg: &[usize], nc: usize) -> RealCsr {
    let n = a.rows;
    let mut sizes = alloc::vec![0usize; nc];
    for &g in agg {
        if g < nc {
            sizes[g] += 1;
        }
    }
    let mut t_ptr = Vec::with_capacity(n + 1);
    let mut t_col = Vec::new();
    let mut t_val = Vec::new();
    t_ptr.push(0);
    for &g in agg {
        if g < nc {
            t_col.push(g);
            t_val.push(1.0 / math::sqrt(sizes[g] as f64));
        }
        t_ptr.push(t_col.len());
    }
    let tent = RealCsr { rows: n, cols: nc, row_ptr: t_ptr, col_idx: t_col, values: t_val };
    let d = a.diagonal();
    let rho = (0..n)
        .map(|i| {
            let row: f64 = a.values[a.row_ptr[i]..a.row_ptr[i + 1]].iter().map(|v| math::abs(*v)).sum();
            if d[i] != 0.0 {
                row / math::abs(d[i])
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    let omega = if rho > 0.0 { 4.0 / (3.0 * rho) } else { 0.0 };
    let mut s = a.clone();
    for i in 0..n {
        for p in s.row_ptr[i]..s.row_ptr[i + 1] {
            let j = s.col_idx[p];
            let scaled = if d[i] != 0.0 { omega * s.values[p] / d[i] } else { 0.0 };
            s.values[p] = if j == i { 1.0 - scaled } else { -scaled };
        }
    }
    s.matmul(&tent)
}

fn to_dense(a: &RealCsr) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(a.rows, a.cols);
    for i in 0..a.rows {
        for p in a.row_ptr[i]..a.row_ptr[i + 1] {
            m[(i, a.col_idx[p])] = C64::new(a.values[p], 0.0);
        }
    }
    m
}
