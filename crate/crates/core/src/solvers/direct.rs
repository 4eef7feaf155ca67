use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{
    analyze, check_inputs, factorize_with, shifted_residual, Factorization, Ordering, ShiftedSolver,
    ShiftedSystemKey, SolveOutcome, SolverError, SolverStats, Symbolic,
};
pub use super::ldl::DEFAULT_PIVOT_TOL;
use crate::linalg::SparseOperator;
use crate::C64;

/// Cached sparse direct solver. One numeric factorization per canonical
/// key; the conjugate key reuses it. No eviction.
#[derive(Debug, Default)]
pub struct DirectSolver {
    ordering: Ordering,
    symbolic: BTreeMap<u64, Arc<Symbolic>>,
    factors: BTreeMap<[u64; 4], Arc<Factorization>>,
    stats: SolverStats,
}

impl DirectSolver {
    pub fn new(ordering: Ordering) -> Self {
        Self { ordering, ..Self::default() }
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    /// Factorization for the canonical form of `key`, computed on first use.
    pub fn factorization(&mut self, a: &SparseOperator, key: &ShiftedSystemKey) -> Result<Arc<Factorization>, SolverError> {
        let (canon, _) = key.canonical();
        if let Some(f) = self.factors.get(&canon.bits()) {
            return Ok(f.clone());
        }
        let ordering = self.ordering;
        let sym = self.symbolic.entry(a.id()).or_insert_with(|| Arc::new(analyze(a, ordering))).clone();
        let f = Arc::new(factorize_with(&sym, a, &canon)?);
        self.stats.numeric_factorizations += 1;
        self.factors.insert(canon.bits(), f.clone());
        Ok(f)
    }

    pub fn cached_factorizations(&self) -> usize {
        self.factors.len()
    }

    pub fn clear(&mut self) {
        self.factors.clear();
        self.symbolic.clear();
    }
}

/// Solves with `f` for `key`, conjugating when `key` is the conjugate of
/// the factorized shift.
pub fn solve_with(f: &Factorization, conjugated: bool, rhs: &[C64]) -> Vec<C64> {
    if conjugated {
        let b: Vec<C64> = rhs.iter().map(|z| z.conj()).collect();
        f.solve(&b).into_iter().map(|z| z.conj()).collect()
    } else {
        f.solve(rhs)
    }
}

impl ShiftedSolver for DirectSolver {
    fn solve(&mut self, a: &SparseOperator, key: &ShiftedSystemKey, rhs: &[C64]) -> Result<SolveOutcome, SolverError> {
        check_inputs(a, key, rhs)?;
        let f = self.factorization(a, key)?;
        let (_, conjugated) = key.canonical();
        let x = solve_with(&f, conjugated, rhs);
        let residual = shifted_residual(a, key.pole, key.scale, &x, rhs);
        let out = SolveOutcome { x, iterations: 0, residual };
        self.stats.record(&out);
        Ok(out)
    }

    fn stats(&self) -> SolverStats {
        self.stats
    }
}
