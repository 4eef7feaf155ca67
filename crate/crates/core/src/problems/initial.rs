use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{fd_coordinates_1d, BoundaryCondition, ProblemError, ProblemKind};
use crate::math;

/// All random data in the crate comes from ChaCha8 seeded through
/// `SeedableRng::seed_from_u64`.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` independent samples, uniform on `[lo, hi)`.
pub fn uniform_random(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// `0.1 + 0.1 cos(2πx) cos(2πy)`.
pub fn allen_cahn_initial_value(x: f64, y: f64) -> f64 {
    0.1 + 0.1 * math::cos(2.0 * PI * x) * math::cos(2.0 * PI * y)
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    Scalar(Vec<f64>),
    ActivatorInhibitor { a: Vec<f64>, h: Vec<f64> },
}

impl InitialState {
    /// Flattened state, activator block first.
    pub fn into_vec(self) -> Vec<f64> {
        match self {
            Self::Scalar(u) => u,
            Self::ActivatorInhibitor { mut a, h } => {
                a.extend(h);
                a
            }
        }
    }
}

/// Initial data for a named problem family. `size` is `nx` for grid
/// problems (state length `nx²` per species) and the node count for graphs.
pub fn initial_condition(kind: &str, size: usize, seed: u64) -> Result<InitialState, ProblemError> {
    let kind: ProblemKind = kind.parse()?;
    Ok(match kind {
        ProblemKind::AllenCahn2d => {
            let xs = fd_coordinates_1d(size, -1.0, 2.0, BoundaryCondition::Neumann);
            let mut u = Vec::with_capacity(size * size);
            for &x in &xs {
                for &y in &xs {
                    u.push(allen_cahn_initial_value(x, y));
                }
            }
            InitialState::Scalar(u)
        }
        ProblemKind::GiererMeinhardt2d => InitialState::ActivatorInhibitor {
            a: uniform_random(size * size, 0.4, 0.6, seed),
            h: alloc::vec![0.2; size * size],
        },
        ProblemKind::GraphAllenCahn => InitialState::Scalar(uniform_random(size, -1.0, 1.0, seed)),
        ProblemKind::GraphGiererMeinhardt => InitialState::ActivatorInhibitor {
            a: uniform_random(size, 0.4, 0.6, seed),
            h: alloc::vec![0.2; size],
        },
    })
}
