use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{
    check_inputs, shifted_apply, Amg, AmgOptions, Ilu0, PreconditionerKind, RealCsr, ShiftedSolver,
    ShiftedSystemKey, SolveOutcome, SolverConfig, SolverError, SolverStats,
};
use crate::linalg::{vector, SparseOperator};
use crate::C64;

/// Approximate inverse applied as `z = P⁻¹ r`.
pub trait Preconditioner: Send + Sync {
    fn apply(&self, r: &[C64], z: &mut [C64]);
}

struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[C64], z: &mut [C64]) {
        z.copy_from_slice(r);
    }
}

impl Preconditioner for Ilu0 {
    fn apply(&self, r: &[C64], z: &mut [C64]) {
        Ilu0::apply(self, r, z);
    }
}

impl Preconditioner for Amg {
    fn apply(&self, r: &[C64], z: &mut [C64]) {
        Amg::apply(self, r, z);
    }
}

/// Preconditioned Krylov solver for `Re ξ > 0`. Preconditioners are built
/// on `|ξ| I + α A` and cached per `(A, |ξ|, α)`.
pub struct IterativeSolver {
    config: SolverConfig,
    amg: AmgOptions,
    cache: BTreeMap<[u64; 3], Arc<dyn Preconditioner>>,
    stats: SolverStats,
}

impl core::fmt::Debug for IterativeSolver {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("IterativeSolver")
            .field("config", &self.config)
            .field("cached_preconditioners", &self.cache.len())
            .field("stats", &self.stats)
            .finish()
    }
}

impl IterativeSolver {
    pub fn new(config: SolverConfig) -> Result<Self, SolverError> {
        config.validate()?;
        Ok(Self { config, amg: AmgOptions::default(), cache: BTreeMap::new(), stats: SolverStats::default() })
    }

    pub fn with_amg_options(mut self, opts: AmgOptions) -> Self {
        self.amg = opts;
        self
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn clear(&mut self) {
        self.cache.clear();
    }

    fn preconditioner(&mut self, a: &SparseOperator, key: &ShiftedSystemKey) -> Result<Arc<dyn Preconditioner>, SolverError> {
        let shift = key.pole.norm();
        let id = [shift.to_bits(), key.scale.to_bits(), key.operator_id];
        if let Some(p) = self.cache.get(&id) {
            return Ok(p.clone());
        }
        let p: Arc<dyn Preconditioner> = match self.config.preconditioner {
            PreconditionerKind::None => Arc::new(Identity),
            PreconditionerKind::Ilu0 => Arc::new(Ilu0::new(&RealCsr::shifted(a, key.scale, shift))?),
            PreconditionerKind::AggregationAmg => Arc::new(Amg::new(&RealCsr::shifted(a, key.scale, shift), &self.amg)),
        };
        self.stats.preconditioner_builds += 1;
        self.cache.insert(id, p.clone());
        Ok(p)
    }
}

impl ShiftedSolver for IterativeSolver {
    fn solve(&mut self, a: &SparseOperator, key: &ShiftedSystemKey, rhs: &[C64]) -> Result<SolveOutcome, SolverError> {
        check_inputs(a, key, rhs)?;
        if !(key.pole.re > 0.0) {
            return Err(SolverError::IndefiniteShift { pole: key.pole });
        }
        if vector::norm2(rhs) == 0.0 {
            let out = SolveOutcome { x: vector::zeros(rhs.len()), iterations: 0, residual: 0.0 };
            self.stats.record(&out);
            return Ok(out);
        }
        let prec = self.preconditioner(a, key)?;
        let sys = System { a, pole: key.pole, scale: key.scale };
        let (tol, maxit) = (self.config.tolerance, self.config.max_iterations);
        let result = if key.pole.im == 0.0 {
            pcg(&sys, prec.as_ref(), rhs, tol, maxit)
        } else {
            bicgstab(&sys, prec.as_ref(), rhs, tol, maxit)
        };
        match result {
            Ok(out) => {
                self.stats.record(&out);
                Ok(out)
            }
            Err(e) => {
                if let SolverError::NotConverged { iterations, .. } = &e {
                    self.stats.iterations += iterations;
                }
                Err(e)
            }
        }
    }

    fn stats(&self) -> SolverStats {
        self.stats
    }
}

struct System<'a> {
    a: &'a SparseOperator,
    pole: C64,
    scale: f64,
}

impl System<'_> {
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.a.spmv_into(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = *yi * self.scale + self.pole * xi;
        }
    }

    fn true_residual(&self, x: &[C64], b: &[C64]) -> f64 {
        let mx = shifted_apply(self.a, self.pole, self.scale, x);
        vector::norm2(&vector::sub(b, &mx)) / vector::norm2(b)
    }
}

fn not_converged(sys: &System<'_>, iterations: usize, best: Vec<C64>, b: &[C64]) -> SolverError {
    let residual = sys.true_residual(&best, b);
    SolverError::NotConverged { iterations, residual, best }
}

/// Right-preconditioned BiCGStab, restarted from the true residual on
/// breakdown or when the recursive residual drifts.
fn bicgstab(sys: &System<'_>, prec: &dyn Preconditioner, b: &[C64], tol: f64, maxit: usize) -> Result<SolveOutcome, SolverError> {
    let n = b.len();
    let bnorm = vector::norm2(b);
    let zero = C64::new(0.0, 0.0);
    let mut x = vector::zeros(n);
    let mut best = (f64::INFINITY, x.clone());
    let mut r = b.to_vec();
    let mut it = 0;
    let (mut p, mut v, mut ph, mut sh, mut t) =
        (vector::zeros(n), vector::zeros(n), vector::zeros(n), vector::zeros(n), vector::zeros(n));
    let mut restarts = 0;
    'outer: while it < maxit {
        let rhat = r.clone();
        let (mut rho, mut alpha, mut omega) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        p.iter_mut().for_each(|z| *z = zero);
        v.iter_mut().for_each(|z| *z = zero);
        while it < maxit {
            let rho_new = vector::dot(&rhat, &r);
            if rho_new.norm() == 0.0 || omega.norm() == 0.0 {
                break;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            prec.apply(&p, &mut ph);
            sys.apply(&ph, &mut v);
            let denom = vector::dot(&rhat, &v);
            if denom.norm() == 0.0 {
                break;
            }
            alpha = rho / denom;
            it += 1;
            let mut s = r.clone();
            vector::axpy(-alpha, &v, &mut s);
            let snorm = vector::norm2(&s) / bnorm;
            if snorm <= tol {
                vector::axpy(alpha, &ph, &mut x);
                if finish(sys, &x, b, tol) {
                    break 'outer;
                }
                r = vector::sub(b, &shifted_apply(sys.a, sys.pole, sys.scale, &x));
                continue 'outer;
            }
            prec.apply(&s, &mut sh);
            sys.apply(&sh, &mut t);
            let tt = vector::dot(&t, &t);
            omega = if tt.norm() == 0.0 { zero } else { vector::dot(&t, &s) / tt };
            for i in 0..n {
                x[i] += alpha * ph[i] + omega * sh[i];
                r[i] = s[i] - omega * t[i];
            }
            let rnorm = vector::norm2(&r) / bnorm;
            if rnorm < best.0 {
                best = (rnorm, x.clone());
            }
            if rnorm <= tol {
                if finish(sys, &x, b, tol) {
                    break 'outer;
                }
                r = vector::sub(b, &shifted_apply(sys.a, sys.pole, sys.scale, &x));
                continue 'outer;
            }
        }
        restarts += 1;
        if restarts > 20 {
            return Err(not_converged(sys, it, best.1, b));
        }
        r = vector::sub(b, &shifted_apply(sys.a, sys.pole, sys.scale, &x));
    }
    let residual = sys.true_residual(&x, b);
    if residual <= tol {
        Ok(SolveOutcome { x, iterations: it, residual })
    } else {
        let cand = if best.0.is_finite() && sys.true_residual(&best.1, b) < residual { best.1 } else { x };
        Err(not_converged(sys, it, cand, b))
    }
}

fn finish(sys: &System<'_>, x: &[C64], b: &[C64], tol: f64) -> bool {
    sys.true_residual(x, b) <= tol
}

/// Preconditioned CG for real positive shifts (`ξ I + α A` is SPD).
fn pcg(sys: &System<'_>, prec: &dyn Preconditioner, b: &[C64], tol: f64, maxit: usize) -> Result<SolveOutcome, SolverError> {
    let n = b.len();
    let bnorm = vector::norm2(b);
    let mut x = vector::zeros(n);
    let mut r = b.to_vec();
    let mut z = vector::zeros(n);
    let mut q = vector::zeros(n);
    prec.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = vector::dot(&r, &z).re;
    let mut it = 0;
    while it < maxit {
        sys.apply(&p, &mut q);
        let pq = vector::dot(&p, &q).re;
        if !(pq > 0.0) {
            break;
        }
        let alpha = rz / pq;
        vector::axpy(C64::new(alpha, 0.0), &p, &mut x);
        vector::axpy(C64::new(-alpha, 0.0), &q, &mut r);
        it += 1;
        if vector::norm2(&r) / bnorm <= tol {
            if finish(sys, &x, b, tol) {
                let residual = sys.true_residual(&x, b);
                return Ok(SolveOutcome { x, iterations: it, residual });
            }
            r = vector::sub(b, &shifted_apply(sys.a, sys.pole, sys.scale, &x));
        }
        prec.apply(&r, &mut z);
        let rz_new = vector::dot(&r, &z).re;
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + p[i] * beta;
        }
    }
    let residual = sys.true_residual(&x, b);
    if residual <= tol {
        Ok(SolveOutcome { x, iterations: it, residual })
    } else {
        Err(not_converged(sys, it, x, b))
    }
}
