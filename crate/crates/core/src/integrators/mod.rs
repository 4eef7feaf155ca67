//! Exponential Runge–Kutta time stepping. Every stage and the final update
//! is one `expmv` call: stage `j` with `h' = c_j h` evaluates
//! `Σ_l h'^l φ_l(-h' A) c_l` with `c_0 = u` and
//! `c_l = (h / h'^l) Σ_k β_{jkl} G_k`.

mod engine;
mod tableau;

use alloc::vec::Vec;
use core::fmt;

pub use engine::{ExpmvEngine, PolynomialEngine, RationalEngine};
pub use tableau::{tableau, Registry, Tableau, TableauError, Term, BUILTIN_TABLEAUS};

use crate::krylov::{Clock, ExpmvReport, KrylovError};
use crate::linalg::vector;
use crate::problems::Problem;

/// Payload of one `expmv` call: `Σ_{l=0}^p h^l φ_l(-h A) c_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpmvInput {
    pub h: f64,
    /// `[c_0, …, c_p]`, trailing zero vectors trimmed.
    pub vectors: Vec<Vec<f64>>,
}

impl ExpmvInput {
    pub fn p(&self) -> usize {
        self.vectors.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum IntegrateError {
    Krylov { t: f64, stage: usize, source: KrylovError },
    /// A stage or step produced NaN or infinity; `state` is the last finite
    /// state.
    NonFinite { step: usize, t: f64, state: Vec<f64> },
    /// Stage with `c_j = 0` but nonzero coupling.
    ZeroNode { stage: usize },
    InvalidParameter(&'static str),
}

impl fmt::Display for IntegrateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Krylov { t, stage, source } => write!(f, "expmv failed at t = {t}, stage {stage}: {source}"),
            Self::NonFinite { step, t, .. } => write!(f, "non-finite state in step {step} (t = {t})"),
            Self::ZeroNode { stage } => write!(f, "stage {stage} has node 0 but nonzero coefficients"),
            Self::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for IntegrateError {}

/// `(h, [c_0, …, c_p])` for stage `j` (0-based), or `None` when `c_j = 0`
/// and the stage value is `u` itself. `g[k]` is `G_k`.
pub fn stage_to_expmv(tab: &Tableau, j: usize, h: f64, u: &[f64], g: &[Vec<f64>]) -> Result<Option<ExpmvInput>, IntegrateError> {
    let c = tab.nodes()[j];
    let terms = tab.stage_terms(j);
    if c == 0.0 {
        return if terms.iter().all(|t| t.coef == 0.0) { Ok(None) } else { Err(IntegrateError::ZeroNode { stage: j }) };
    }
    Ok(Some(combine(terms, c * h, h, u, g)))
}

/// Update `u_{n+1}` as one input with `h' = h`.
pub fn update_to_expmv(tab: &Tableau, h: f64, u: &[f64], g: &[Vec<f64>]) -> ExpmvInput {
    combine(tab.weight_terms(), h, h, u, g)
}

fn combine(terms: &[tableau::Term], hp: f64, h: f64, u: &[f64], g: &[Vec<f64>]) -> ExpmvInput {
    let p = terms.iter().map(|t| t.phi).max().unwrap_or(0);
    let mut vectors = alloc::vec![alloc::vec![0.0; u.len()]; p + 1];
    vectors[0].copy_from_slice(u);
    for t in terms {
        let factor = t.coef * h / crate::math::powi(hp, t.phi as i32);
        for (v, gk) in vectors[t.phi].iter_mut().zip(&g[t.source]) {
            *v += factor * gk;
        }
    }
    while vectors.len() > 1 && vectors.last().is_some_and(|v| v.iter().all(|&x| x == 0.0)) {
        vectors.pop();
    }
    ExpmvInput { h: hp, vectors }
}

/// One call's bookkeeping.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExpmvSummary {
    pub step: usize,
    /// 0-based stage, `stages()` for the update.
    pub stage: usize,
    pub dimension: usize,
    pub estimate: f64,
    pub converged: bool,
    pub poles_consumed: usize,
    pub polynomial_steps: usize,
    pub substeps: usize,
    pub solver_iterations: usize,
    pub max_solver_residual: f64,
    pub imaginary_residue: f64,
    pub wall_time: f64,
}

impl ExpmvSummary {
    fn from_report(step: usize, stage: usize, r: &ExpmvReport) -> Self {
        Self {
            step,
            stage,
            dimension: r.dimension,
            estimate: r.final_estimate(),
            converged: r.converged,
            poles_consumed: r.poles_consumed,
            polynomial_steps: r.polynomial_steps,
            substeps: r.substeps,
            solver_iterations: r.total_solver_iterations(),
            max_solver_residual: r.max_solver_residual,
            imaginary_residue: r.imaginary_residue(),
            wall_time: r.wall_time,
        }
    }
}

fn run_engine(
    engine: &mut dyn ExpmvEngine,
    problem: &Problem,
    input: &ExpmvInput,
    clock: Option<&dyn Clock>,
    t: f64,
    stage: usize,
) -> Result<ExpmvReport, IntegrateError> {
    let start = clock.map(|c| c.seconds());
    let mut report = engine.expmv(&problem.operator, input).map_err(|source| IntegrateError::Krylov { t, stage, source })?;
    if let (Some(c), Some(s)) = (clock, start) {
        report.wall_time = c.seconds() - s;
    }
    Ok(report)
}

/// One exponential Runge–Kutta step from `(t, u)`; returns `u_{n+1}` and
/// one report per engine call.
pub fn step(
    problem: &Problem,
    tab: &Tableau,
    u: &[f64],
    t: f64,
    h: f64,
    engine: &mut dyn ExpmvEngine,
    clock: Option<&dyn Clock>,
) -> Result<(Vec<f64>, Vec<ExpmvReport>), IntegrateError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(IntegrateError::InvalidParameter("step size must be positive"));
    }
    let s = tab.stages();
    let mut g: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut reports = Vec::with_capacity(s + 1);
    for j in 0..s {
        let uj = match stage_to_expmv(tab, j, h, u, &g)? {
            None => u.to_vec(),
            Some(input) => {
                let r = run_engine(engine, problem, &input, clock, t, j)?;
                let v = vector::real_part(&r.result);
                reports.push(r);
                v
            }
        };
        if !uj.iter().all(|x| x.is_finite()) {
            return Err(IntegrateError::NonFinite { step: 0, t, state: u.to_vec() });
        }
        g.push(problem.reaction(t + tab.nodes()[j] * h, &uj));
    }
    let input = update_to_expmv(tab, h, u, &g);
    let r = run_engine(engine, problem, &input, clock, t, s)?;
    let next = vector::real_part(&r.result);
    reports.push(r);
    if !next.iter().all(|x| x.is_finite()) {
        return Err(IntegrateError::NonFinite { step: 0, t, state: u.to_vec() });
    }
    Ok((next, reports))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
    pub final_time: f64,
    pub final_state: Vec<f64>,
    pub steps: usize,
    pub calls: Vec<ExpmvSummary>,
}

impl Trajectory {
    /// Mean subspace dimension per call.
    pub fn mean_dimension(&self) -> f64 {
        if self.calls.is_empty() {
            return 0.0;
        }
        self.calls.iter().map(|c| c.dimension as f64).sum::<f64>() / self.calls.len() as f64
    }

    pub fn max_estimate(&self) -> f64 {
        self.calls.iter().map(|c| c.estimate).fold(0.0, f64::max)
    }

    pub fn all_converged(&self) -> bool {
        self.calls.iter().all(|c| c.converged)
    }

    pub fn solver_iterations(&self) -> usize {
        self.calls.iter().map(|c| c.solver_iterations).sum()
    }

    pub fn max_solver_residual(&self) -> f64 {
        self.calls.iter().map(|c| c.max_solver_residual).fold(0.0, f64::max)
    }
}

/// Fixed-step integration over `[t0, t0 + T]`. The final step is shortened
/// when `h` does not divide `T`. Snapshots are kept at `t0`, every `stride`
/// steps, and at the end.
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    problem: &Problem,
    tab: &Tableau,
    u0: &[f64],
    t0: f64,
    h: f64,
    t_end: f64,
    engine: &mut dyn ExpmvEngine,
    stride: usize,
    clock: Option<&dyn Clock>,
) -> Result<Trajectory, IntegrateError> {
    if !(h > 0.0 && h.is_finite()) || !(t_end > 0.0 && t_end.is_finite()) {
        return Err(IntegrateError::InvalidParameter("h and T must be positive"));
    }
    if u0.len() != problem.n() {
        return Err(IntegrateError::InvalidParameter("initial state has the wrong length"));
    }
    let n_steps = (crate::math::ceil(t_end / h - 1e-9) as usize).max(1);
    let stride = stride.max(1);
    let mut traj = Trajectory { times: alloc::vec![t0], snapshots: alloc::vec![u0.to_vec()], ..Trajectory::default() };
    let mut u = u0.to_vec();
    let mut t = t0;
    for k in 0..n_steps {
        let hk = if k + 1 == n_steps { t_end - k as f64 * h } else { h };
        let (next, reports) = match step(problem, tab, &u, t, hk, engine, clock) {
            Ok(v) => v,
            Err(IntegrateError::NonFinite { t, state, .. }) => return Err(IntegrateError::NonFinite { step: k, t, state }),
            Err(e) => return Err(e),
        };
        let stages: Vec<usize> = (0..tab.stages()).filter(|&j| tab.nodes()[j] != 0.0).chain([tab.stages()]).collect();
        for (stage, r) in stages.into_iter().zip(&reports) {
            traj.calls.push(ExpmvSummary::from_report(k, stage, r));
        }
        u = next;
        t = t0 + if k + 1 == n_steps { t_end } else { (k + 1) as f64 * h };
        if (k + 1) % stride == 0 || k + 1 == n_steps {
            traj.times.push(t);
            traj.snapshots.push(u.clone());
        }
    }
    traj.steps = n_steps;
    traj.final_time = t;
    traj.final_state = u;
    Ok(traj)
}
