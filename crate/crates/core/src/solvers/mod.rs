//! Shifted linear systems `(ξ I + α A) x = b` for real symmetric `A` and
//! complex `ξ`.
//!
//! Two back ends share the [`ShiftedSolver`] interface:
//! - [`DirectSolver`]: sparse complex-symmetric `L D Lᵀ` with a
//!   fill-reducing ordering, cached per key. A key and its conjugate share
//!   one factorization since `conj(M) x = b ⇔ M conj(x) = conj(b)`.
//! - [`IterativeSolver`]: BiCGStab (complex shifts) or CG (real shifts),
//!   right-preconditioned by ILU(0) or smoothed-aggregation AMG built on the
//!   real SPD matrix `|ξ| I + α A`.

mod amg;
mod direct;
mod ilu;
mod iterative;
mod ldl;
mod ordering;
mod real_csr;

use alloc::vec::Vec;
use core::fmt;

pub use amg::{Amg, AmgOptions};
pub use direct::{solve_with, DirectSolver, DEFAULT_PIVOT_TOL};
pub use ilu::Ilu0;
pub use iterative::{IterativeSolver, Preconditioner};
pub use ldl::{analyze, factorize, factorize_with, Factorization, Symbolic};
pub use ordering::{rcm_ordering, Ordering};
pub use real_csr::RealCsr;

use crate::krylov::AugmentedOperator;
use crate::linalg::{vector, SparseOperator};
use crate::C64;

/// Identifies one shifted matrix `ξ I + α A`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftedSystemKey {
    pub pole: C64,
    pub scale: f64,
    pub operator_id: u64,
}

impl ShiftedSystemKey {
    pub fn new(pole: C64, scale: f64, a: &SparseOperator) -> Self {
        Self { pole, scale, operator_id: a.id() }
    }

    /// The representative with `Im ξ ≥ 0` and whether `self` is its conjugate.
    pub fn canonical(&self) -> (Self, bool) {
        if self.pole.im < 0.0 {
            (Self { pole: self.pole.conj(), ..*self }, true)
        } else {
            (*self, false)
        }
    }

    /// Bit pattern used as a map key (`-0.0` folded into `0.0`).
    pub fn bits(&self) -> [u64; 4] {
        let b = |x: f64| if x == 0.0 { 0 } else { x.to_bits() };
        [b(self.pole.re), b(self.pole.im), b(self.scale), self.operator_id]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMode {
    Direct,
    Iterative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreconditionerKind {
    None,
    Ilu0,
    AggregationAmg,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub mode: SolverMode,
    /// Relative residual target of the iterative path.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub preconditioner: PreconditionerKind,
    pub ordering: Ordering,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: SolverMode::Direct,
            tolerance: 1e-7,
            max_iterations: 1000,
            preconditioner: PreconditionerKind::Ilu0,
            ordering: Ordering::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(SolverError::InvalidConfig("tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(SolverError::InvalidConfig("max_iterations must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub x: Vec<C64>,
    pub iterations: usize,
    /// `‖b - M x‖ / ‖b‖` (0 for `b = 0`).
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolverStats {
    pub solves: usize,
    pub iterations: usize,
    pub max_residual: f64,
    pub numeric_factorizations: usize,
    pub preconditioner_builds: usize,
}

impl SolverStats {
    pub(crate) fn record(&mut self, out: &SolveOutcome) {
        self.solves += 1;
        self.iterations += out.iterations;
        if out.residual > self.max_residual {
            self.max_residual = out.residual;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolverError {
    DimensionMismatch { expected: usize, found: usize },
    OperatorMismatch,
    NotSymmetric,
    InvalidScale(f64),
    /// `ξ I + α A` has a (numerically) zero pivot.
    SingularPivot { pole: C64, scale: f64, index: usize },
    /// The iterative path requires `Re ξ > 0`.
    IndefiniteShift { pole: C64 },
    NotConverged { iterations: usize, residual: f64, best: Vec<C64> },
    /// `ξ = 0` with a nontrivial augmentation block.
    ZeroPole,
    InvalidConfig(&'static str),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Self::OperatorMismatch => write!(f, "system key refers to a different operator"),
            Self::NotSymmetric => write!(f, "shifted solvers require a symmetric operator"),
            Self::InvalidScale(s) => write!(f, "operator scale must be positive and finite, got {s}"),
            Self::SingularPivot { pole, scale, index } => write!(
                f,
                "singular pivot {index} for pole {pole} at scale {scale}: the pole coincides with a negated eigenvalue"
            ),
            Self::IndefiniteShift { pole } => {
                write!(f, "iterative solves need Re(pole) > 0, got {pole}; use the direct solver")
            }
            Self::NotConverged { iterations, residual, .. } => {
                write!(f, "no convergence after {iterations} iterations (residual {residual:e})")
            }
            Self::ZeroPole => write!(f, "pole 0 makes the augmentation block singular"),
            Self::InvalidConfig(m) => write!(f, "invalid solver configuration: {m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SolverError {}

/// Common interface of the shifted-system back ends.
pub trait ShiftedSolver {
    fn solve(&mut self, a: &SparseOperator, key: &ShiftedSystemKey, rhs: &[C64]) -> Result<SolveOutcome, SolverError>;

    fn stats(&self) -> SolverStats {
        SolverStats::default()
    }
}

impl<S: ShiftedSolver + ?Sized> ShiftedSolver for &mut S {
    fn solve(&mut self, a: &SparseOperator, key: &ShiftedSystemKey, rhs: &[C64]) -> Result<SolveOutcome, SolverError> {
        (**self).solve(a, key, rhs)
    }

    fn stats(&self) -> SolverStats {
        (**self).stats()
    }
}

pub(crate) fn check_inputs(a: &SparseOperator, key: &ShiftedSystemKey, rhs: &[C64]) -> Result<(), SolverError> {
    if rhs.len() != a.n() {
        return Err(SolverError::DimensionMismatch { expected: a.n(), found: rhs.len() });
    }
    if key.operator_id != a.id() {
        return Err(SolverError::OperatorMismatch);
    }
    if !(key.scale > 0.0 && key.scale.is_finite()) {
        return Err(SolverError::InvalidScale(key.scale));
    }
    if !a.is_symmetric() {
        return Err(SolverError::NotSymmetric);
    }
    Ok(())
}

/// `y = (ξ I + α A) x`.
pub fn shifted_apply(a: &SparseOperator, pole: C64, scale: f64, x: &[C64]) -> Vec<C64> {
    let mut y = vector::zeros(x.len());
    a.spmv_into(x, &mut y);
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi * scale + pole * xi;
    }
    y
}

/// `‖b - (ξ I + α A) x‖ / ‖b‖`, or `‖x‖` when `b = 0`.
pub fn shifted_residual(a: &SparseOperator, pole: C64, scale: f64, x: &[C64], b: &[C64]) -> f64 {
    let r = vector::sub(b, &shifted_apply(a, pole, scale, x));
    let bn = vector::norm2(b);
    if bn == 0.0 {
        vector::norm2(x)
    } else {
        vector::norm2(&r) / bn
    }
}

/// Solution of the block system `(ξ I - Ã) x = ξ · rhs`.
#[derive(Clone, Debug)]
pub struct BlockSolve {
    pub x: Vec<C64>,
    pub iterations: usize,
    /// Relative residual of the shifted top-block solve.
    pub residual: f64,
}

/// Solves `(ξ I - Ã) x = ξ rhs` by back substitution: the bidiagonal
/// `(ξ I_p - J_p)` block first, then one shifted solve with `ξ I + α A` and
/// right-hand side `ξ rhs_n + C x_p`.
pub fn block_backsubstitute(
    aug: &AugmentedOperator<'_>,
    pole: C64,
    rhs: &[C64],
    solver: &mut dyn ShiftedSolver,
) -> Result<BlockSolve, SolverError> {
    let (n, p) = (aug.n(), aug.p());
    if rhs.len() != n + p {
        return Err(SolverError::DimensionMismatch { expected: n + p, found: rhs.len() });
    }
    if p > 0 && pole == C64::new(0.0, 0.0) {
        return Err(SolverError::ZeroPole);
    }
    // (ξ - J) x_p = ξ r_p with (J x)_i = x_{i+1}.
    let mut xp = vector::zeros(p);
    for i in (0..p).rev() {
        let next = if i + 1 < p { xp[i + 1] / pole } else { C64::new(0.0, 0.0) };
        xp[i] = rhs[n + i] + next;
    }
    let mut top: Vec<C64> = rhs[..n].iter().map(|r| pole * r).collect();
    for (col, xj) in aug.c_columns().iter().zip(&xp) {
        vector::axpy(*xj, col, &mut top);
    }
    let key = ShiftedSystemKey::new(pole, aug.scale(), aug.operator());
    let out = solver.solve(aug.operator(), &key, &top)?;
    let mut x = out.x;
    x.extend(xp);
    Ok(BlockSolve { x, iterations: out.iterations, residual: out.residual })
}
