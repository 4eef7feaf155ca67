//! Rational Krylov approximation of `e^{hÃ} c̃` for the augmented operator
//! `Ã = [[-α A, C], [0, J_p]]`, whose top block equals
//! `Σ_{k=0}^p h^k φ_k(-h α A) c_k`.
//!
//! [`expmv_rational`] drives the adaptive loop with a pole set and a
//! [`ShiftedSolver`](crate::solvers::ShiftedSolver);
//! [`expmv_polynomial`] is the all-`∞` baseline with sub-stepping.

mod augmented;
mod decomposition;
mod expmv;

use core::fmt;

pub use augmented::{assemble_augmented, AugmentedOperator};
pub use decomposition::{Evaluation, RationalDecomposition, StepInfo};
pub use expmv::{expmv_polynomial, expmv_rational, ExpmvOptions, ExpmvReport};

use crate::linalg::LinalgError;
use crate::solvers::SolverError;

/// Source of wall-clock seconds for timing reports.
pub trait Clock {
    fn seconds(&self) -> f64;
}

#[derive(Clone, Debug, PartialEq)]
pub enum KrylovError {
    EmptyInput,
    DimensionMismatch { expected: usize, found: usize },
    NonFinite,
    InvalidParameter(&'static str),
    /// Step requested on an invariant subspace.
    Invariant,
    /// `K_m` is singular even after trailing `∞` steps.
    SingularK,
    SubstepUnderflow { h_sub: f64 },
    Solver(SolverError),
    Linalg(LinalgError),
}

impl fmt::Display for KrylovError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyInput => write!(f, "expmv needs at least one input vector"),
            Self::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Self::NonFinite => write!(f, "non-finite value in the Krylov basis"),
            Self::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            Self::Invariant => write!(f, "the Krylov space is already invariant"),
            Self::SingularK => write!(f, "the pole matrix K_m is singular"),
            Self::SubstepUnderflow { h_sub } => write!(f, "sub-step underflow (h_sub = {h_sub:e})"),
            Self::Solver(e) => write!(f, "shifted solve failed: {e}"),
            Self::Linalg(e) => write!(f, "dense linear algebra failed: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for KrylovError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Self::Solver(e) => Some(e),
            Self::Linalg(e) => Some(e),
            _ => None,
        }
    }
}

impl From<SolverError> for KrylovError {
    fn from(e: SolverError) -> Self {
        Self::Solver(e)
    }
}

impl From<LinalgError> for KrylovError {
    fn from(e: LinalgError) -> Self {
        Self::Linalg(e)
    }
}
