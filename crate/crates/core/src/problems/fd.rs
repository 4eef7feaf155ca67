use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::ProblemError;
use crate::linalg::SparseOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Periodic,
}

impl BoundaryCondition {
    pub fn name(self) -> &'static str {
        match self {
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
            Self::Periodic => "periodic",
        }
    }
}

impl FromStr for BoundaryCondition {
    type Err = ProblemError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dirichlet" => Ok(Self::Dirichlet),
            "neumann" => Ok(Self::Neumann),
            "periodic" => Ok(Self::Periodic),
            other => Err(ProblemError::UnknownBoundary(other.into())),
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_grid(nx: usize, length: f64) -> Result<f64, ProblemError> {
    if nx < 3 {
        return Err(ProblemError::GridTooSmall { nx });
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(ProblemError::InvalidLength(length));
    }
    Ok(length / nx as f64)
}

/// `(1/h²) tridiag(-1, 2, -1)` with `h = L/nx`.
///
/// Neumann closes with the mirror-node rows `(1, -1)/h²`; periodic adds the
/// wrap-around couplings.
pub fn fd_laplacian_1d(nx: usize, length: f64, bc: BoundaryCondition) -> Result<SparseOperator, ProblemError> {
    let h = check_grid(nx, length)?;
    let s = 1.0 / (h * h);
    let mut t = Vec::with_capacity(3 * nx + 2);
    for i in 0..nx {
        let edge = i == 0 || i == nx - 1;
        let diag = if edge && bc == BoundaryCondition::Neumann { s } else { 2.0 * s };
        t.push((i, i, diag));
        if i > 0 {
            t.push((i, i - 1, -s));
        }
        if i + 1 < nx {
            t.push((i, i + 1, -s));
        }
    }
    if bc == BoundaryCondition::Periodic {
        t.push((0, nx - 1, -s));
        t.push((nx - 1, 0, -s));
    }
    Ok(SparseOperator::from_triplets(nx, &t)?)
}

/// Kronecker sum `T ⊗ I + I ⊗ T`; entry `i·nx + j` is grid point `(x_i, y_j)`.
pub fn fd_laplacian_2d(nx: usize, length: f64, bc: BoundaryCondition) -> Result<SparseOperator, ProblemError> {
    let t = fd_laplacian_1d(nx, length, bc)?;
    Ok(SparseOperator::kron_sum(&t, &t))
}

/// Grid coordinates matching [`fd_laplacian_1d`]: cell centres
/// `x_min + (i + 1/2) h` for Dirichlet and Neumann, vertices `x_min + i h`
/// for periodic.
pub fn fd_coordinates_1d(nx: usize, x_min: f64, length: f64, bc: BoundaryCondition) -> Vec<f64> {
    let h = length / nx as f64;
    let offset = if bc == BoundaryCondition::Periodic { 0.0 } else { 0.5 };
    (0..nx).map(|i| x_min + (i as f64 + offset) * h).collect()
}
