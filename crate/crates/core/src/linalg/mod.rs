//! Sparse and small dense complex linear algebra.

mod dense;
mod expm;
mod ortho;
mod sparse;
pub mod vector;

use core::fmt;

pub use dense::{DenseLu, DenseMatrix, DEFAULT_DENSE_CAP};
pub use expm::{dense_expm, phi_dense, phi_dense_capped, DEFAULT_MAX_PHI};
pub use ortho::{orthogonal_extend, Extension, BREAKDOWN_TOL};
pub use sparse::SparseOperator;

#[derive(Clone, Debug, PartialEq)]
pub enum LinalgError {
    DimensionMismatch { expected: usize, found: usize },
    TooLarge { dim: usize, cap: usize },
    NonFinite,
    Overflow,
    Singular { pivot: usize },
    PhiIndex { k: usize, max: usize },
    InvalidEntry { row: usize, col: usize },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Self::TooLarge { dim, cap } => {
                write!(f, "dense dimension {dim} exceeds the cap {cap}")
            }
            Self::NonFinite => write!(f, "matrix has non-finite entries"),
            Self::Overflow => write!(f, "overflow in the scaling phase of expm"),
            Self::Singular { pivot } => write!(f, "matrix is singular at pivot {pivot}"),
            Self::PhiIndex { k, max } => write!(f, "phi index {k} exceeds the maximum {max}"),
            Self::InvalidEntry { row, col } => {
                write!(f, "invalid sparse entry at ({row}, {col})")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LinalgError {}
