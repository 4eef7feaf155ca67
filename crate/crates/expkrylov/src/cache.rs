use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex, OnceLock};

use expkrylov_core::linalg::SparseOperator;
use expkrylov_core::solvers::{
    analyze, factorize_with, shifted_residual, solve_with, Factorization, Ordering, ShiftedSolver, ShiftedSystemKey,
    SolveOutcome, SolverError, SolverStats, Symbolic,
};
use expkrylov_core::C64;

type Slot<T> = Arc<OnceLock<T>>;
type FactorSlot = Slot<Result<Arc<Factorization>, SolverError>>;

#[derive(Debug, Default)]
struct Shared {
    ordering: Ordering,
    symbolic: Mutex<HashMap<u64, Slot<Arc<Symbolic>>>>,
    factors: Mutex<HashMap<[u64; 4], FactorSlot>>,
    numeric: AtomicUsize,
    analyses: AtomicUsize,
}

fn slot<K: std::hash::Hash + Eq, T>(map: &Mutex<HashMap<K, Slot<T>>>, key: K) -> Slot<T> {
    map.lock().unwrap_or_else(|e| e.into_inner()).entry(key).or_default().clone()
}

/// Direct solver whose factorization cache is shared by all clones and
/// safe to use from several threads. Concurrent requests for the same key
/// wait for a single numeric factorization.
#[derive(Clone, Debug, Default)]
pub struct SharedDirectSolver {
    shared: Arc<Shared>,
    stats: SolverStats,
}

impl SharedDirectSolver {
    pub fn new(ordering: Ordering) -> Self {
        Self { shared: Arc::new(Shared { ordering, ..Shared::default() }), stats: SolverStats::default() }
    }

    /// Factorization of the canonical form of `key`.
    pub fn factorization(&self, a: &SparseOperator, key: &ShiftedSystemKey) -> Result<Arc<Factorization>, SolverError> {
        let (canon, _) = key.canonical();
        let cell = slot(&self.shared.factors, canon.bits());
        cell.get_or_init(|| {
            let sym = slot(&self.shared.symbolic, a.id())
                .get_or_init(|| {
                    self.shared.analyses.fetch_add(1, AtomicOrdering::Relaxed);
                    Arc::new(analyze(a, self.shared.ordering))
                })
                .clone();
            let f = factorize_with(&sym, a, &canon).map(Arc::new);
            if f.is_ok() {
                self.shared.numeric.fetch_add(1, AtomicOrdering::Relaxed);
            }
            f
        })
        .clone()
    }

    /// Numeric factorizations performed across all clones.
    pub fn numeric_factorizations(&self) -> usize {
        self.shared.numeric.load(AtomicOrdering::Relaxed)
    }

    pub fn symbolic_analyses(&self) -> usize {
        self.shared.analyses.load(AtomicOrdering::Relaxed)
    }

    pub fn cached(&self) -> usize {
        self.shared.factors.lock().unwrap_or_else(|e| e.into_inner()).len()
    }
}

impl ShiftedSolver for SharedDirectSolver {
    fn solve(&mut self, a: &SparseOperator, key: &ShiftedSystemKey, rhs: &[C64]) -> Result<SolveOutcome, SolverError> {
        if rhs.len() != a.n() {
            return Err(SolverError::DimensionMismatch { expected: a.n(), found: rhs.len() });
        }
        let f = self.factorization(a, key)?;
        let (_, conjugated) = key.canonical();
        let x = solve_with(&f, conjugated, rhs);
        let residual = shifted_residual(a, key.pole, key.scale, &x, rhs);
        self.stats.solves += 1;
        self.stats.max_residual = self.stats.max_residual.max(residual);
        Ok(SolveOutcome { x, iterations: 0, residual })
    }

    fn stats(&self) -> SolverStats {
        SolverStats { numeric_factorizations: self.numeric_factorizations(), ..self.stats }
    }
}
