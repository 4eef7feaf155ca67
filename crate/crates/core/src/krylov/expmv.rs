use alloc::vec::Vec;

use super::{assemble_augmented, AugmentedOperator, KrylovError, RationalDecomposition};
use crate::linalg::{vector, SparseOperator};
use crate::poles::{Pole, PoleKind, PoleSet};
use crate::solvers::{ShiftedSolver, SolverError, SolverStats};
use crate::C64;

/// Stopping parameters of the adaptive loops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpmvOptions {
    /// Absolute 2-norm target for the error estimate.
    pub tol: f64,
    /// First size at which the estimate is checked.
    pub m_min: usize,
    /// Hard cap on the subspace dimension.
    pub m_max: usize,
    /// Steps between checks after `m_min`.
    pub cadence: usize,
    pub reorth: usize,
}

impl ExpmvOptions {
    /// Defaults for a rational run with poles of the given kind.
    pub fn rational(kind: PoleKind) -> Self {
        let m_max = match kind {
            PoleKind::RepeatedReal => 72,
            PoleKind::Complex => 30,
        };
        Self { tol: 1e-8, m_min: 5, m_max, cadence: 5, reorth: 1 }
    }

    pub fn polynomial() -> Self {
        Self { tol: 1e-8, m_min: 10, m_max: 128, cadence: 5, reorth: 1 }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<(), KrylovError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(KrylovError::InvalidParameter("tol must be positive"));
        }
        if self.m_min == 0 || self.m_min > self.m_max {
            return Err(KrylovError::InvalidParameter("need 1 <= m_min <= m_max"));
        }
        if self.cadence == 0 {
            return Err(KrylovError::InvalidParameter("cadence must be positive"));
        }
        if self.m_max > crate::linalg::DEFAULT_DENSE_CAP - 16 {
            return Err(KrylovError::InvalidParameter("m_max exceeds the dense cap"));
        }
        Ok(())
    }
}

/// Outcome of one `expmv` call.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpmvReport {
    /// Approximation of `Σ_k h^k φ_k(-h α A) c_k`.
    pub result: Vec<C64>,
    /// Final subspace dimension (summed over sub-steps for the polynomial
    /// baseline).
    pub dimension: usize,
    /// `(m, estimate)` at every check.
    pub estimates: Vec<(usize, f64)>,
    /// Finite poles taken from the pole set.
    pub poles_consumed: usize,
    /// Arnoldi steps with `ξ = ∞`, trailing steps included.
    pub polynomial_steps: usize,
    /// Solver iterations of each finite-pole step.
    pub solver_iterations: Vec<usize>,
    pub max_solver_residual: f64,
    /// Sub-steps used (1 for the rational engine).
    pub substeps: usize,
    /// `false` when the hard cap stopped the loop above tolerance.
    pub converged: bool,
    pub breakdown: bool,
    /// Seconds, filled in by callers that own a clock.
    pub wall_time: f64,
}

impl ExpmvReport {
    pub fn final_estimate(&self) -> f64 {
        self.estimates.last().map_or(0.0, |e| e.1)
    }

    /// Largest `|Im|` relative to the result norm.
    pub fn imaginary_residue(&self) -> f64 {
        let n = vector::norm2(&self.result);
        if n == 0.0 {
            0.0
        } else {
            vector::max_abs_imag(&self.result) / n
        }
    }

    pub fn total_solver_iterations(&self) -> usize {
        self.solver_iterations.iter().sum()
    }
}

/// Solver that rejects every finite pole.
struct NoSolver;

impl ShiftedSolver for NoSolver {
    fn solve(
        &mut self,
        _: &SparseOperator,
        _: &crate::solvers::ShiftedSystemKey,
        _: &[C64],
    ) -> Result<crate::solvers::SolveOutcome, SolverError> {
        Err(SolverError::InvalidConfig("polynomial steps need no solver"))
    }

    fn stats(&self) -> SolverStats {
        SolverStats::default()
    }
}

/// Applies `h^k` to `c_k` so that `Ã` is assembled with scale `α h` and
/// evaluated at time 1.
fn scaled_inputs(c_vectors: &[Vec<C64>], h: f64) -> Vec<Vec<C64>> {
    let mut hk = 1.0;
    c_vectors
        .iter()
        .map(|c| {
            let out = c.iter().map(|z| z * hk).collect();
            hk *= h;
            out
        })
        .collect()
}

fn check_h(h: f64, alpha: f64) -> Result<(), KrylovError> {
    if !(h >= 0.0 && h.is_finite()) {
        return Err(KrylovError::InvalidParameter("step must be finite and non-negative"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(KrylovError::InvalidParameter("operator scale must be positive"));
    }
    Ok(())
}

/// `h = 0`: `m_min` polynomial steps on the unscaled operator, evaluated at
/// time zero.
fn zero_step(a: &SparseOperator, alpha: f64, c_vectors: &[Vec<C64>], opts: &ExpmvOptions) -> Result<ExpmvReport, KrylovError> {
    let (aug, start) = assemble_augmented(a, alpha, c_vectors)?;
    let mut d = RationalDecomposition::with_reorth(&start, opts.reorth)?;
    let mut report = ExpmvReport { substeps: 1, ..ExpmvReport::default() };
    while d.m() < opts.m_min && !d.is_invariant() {
        d.step(&aug, Pole::Infinite, &mut NoSolver)?;
        report.polynomial_steps += 1;
    }
    let ev = d.evaluate(0.0)?;
    report.result = ev.approximation[..a.n()].to_vec();
    report.dimension = d.m();
    report.estimates.push((d.m(), 0.0));
    report.converged = true;
    report.breakdown = d.is_invariant();
    Ok(report)
}

/// Adaptive rational Krylov approximation of `Σ_{k=0}^p h^k φ_k(-h α A) c_k`
/// via `e^{hÃ} c̃`.
///
/// Poles are consumed in order, then `∞`. The estimate is checked at
/// `m_min`, every `cadence` steps afterwards, and at `m_max`; a check whose
/// last pole is finite first appends `∞` steps, which are dropped again if
/// the check fails. Checks are deferred by one step when they would split a
/// conjugate pair. Reaching `m_max` above tolerance returns a report with
/// `converged = false`.
pub fn expmv_rational(
    a: &SparseOperator,
    alpha: f64,
    c_vectors: &[Vec<C64>],
    h: f64,
    poles: &PoleSet,
    opts: &ExpmvOptions,
    solver: &mut dyn ShiftedSolver,
) -> Result<ExpmvReport, KrylovError> {
    opts.validate()?;
    check_h(h, alpha)?;
    if h == 0.0 {
        return zero_step(a, alpha, c_vectors, opts);
    }
    let scaled = scaled_inputs(c_vectors, h);
    let (aug, start) = assemble_augmented(a, alpha * h, &scaled)?;
    let mut d = RationalDecomposition::with_reorth(&start, opts.reorth)?;
    let mut report = ExpmvReport { substeps: 1, ..ExpmvReport::default() };
    let mut next_check = opts.m_min;
    let mut used = 0;
    let splits = pair_splits(poles);
    loop {
        if d.is_invariant() {
            let ev = d.evaluate(1.0)?;
            report.estimates.push((d.m(), ev.estimate));
            return Ok(finish(report, &d, ev.approximation, a.n(), true));
        }
        let m = d.m();
        let at_cap = m >= opts.m_max;
        if at_cap || m >= next_check {
            let pair_open = splits[used] && !at_cap && m + 1 < opts.m_max;
            if !pair_open {
                let (ev, added) = check_with_trailing_infinity(&mut d, &aug, &mut report)?;
                report.estimates.push((d.m(), ev.estimate));
                if ev.estimate <= opts.tol || at_cap || d.is_invariant() {
                    let ok = ev.estimate <= opts.tol || d.is_invariant();
                    return Ok(finish(report, &d, ev.approximation, a.n(), ok));
                }
                if added > 0 {
                    d.truncate(m);
                    report.polynomial_steps -= added;
                }
                next_check = (next_check + opts.cadence).min(opts.m_max).max(m + 1);
                continue;
            }
        }
        // The last slot below the cap is reserved for a trailing ∞ step.
        let pole = if used < poles.len() && m + 1 < opts.m_max { poles.get(used) } else { Pole::Infinite };
        let info = d.step(&aug, pole, solver)?;
        if pole.is_finite() {
            used += 1;
            report.poles_consumed += 1;
            report.solver_iterations.push(info.iterations);
            report.max_solver_residual = report.max_solver_residual.max(info.residual);
        } else {
            report.polynomial_steps += 1;
        }
    }
}

/// `splits[k]`: taking the first `k` poles separates a conjugate pair.
fn pair_splits(poles: &PoleSet) -> Vec<bool> {
    let p = poles.poles();
    let mut splits = alloc::vec![false; p.len() + 1];
    let mut i = 0;
    while i < p.len() {
        let paired = i + 1 < p.len() && p[i].im != 0.0 && (p[i + 1] - p[i].conj()).norm() <= crate::poles::CONJUGATE_TOL * p[i].norm();
        if paired {
            splits[i + 1] = true;
            i += 2;
        } else {
            i += 1;
        }
    }
    splits
}

/// Appends `∞` steps until `K_m` is invertible with a trailing `∞` pole,
/// then evaluates at time 1. Returns the number of steps added.
fn check_with_trailing_infinity(
    d: &mut RationalDecomposition,
    aug: &AugmentedOperator<'_>,
    report: &mut ExpmvReport,
) -> Result<(super::Evaluation, usize), KrylovError> {
    let mut added = 0;
    if matches!(d.poles().last(), Some(Pole::Finite(_))) {
        d.step(aug, Pole::Infinite, &mut NoSolver)?;
        report.polynomial_steps += 1;
        added += 1;
    }
    loop {
        match d.evaluate(1.0) {
            Ok(ev) => return Ok((ev, added)),
            Err(KrylovError::SingularK) if added < 3 && !d.is_invariant() => {
                d.step(aug, Pole::Infinite, &mut NoSolver)?;
                report.polynomial_steps += 1;
                added += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn finish(mut report: ExpmvReport, d: &RationalDecomposition, approx: Vec<C64>, n: usize, converged: bool) -> ExpmvReport {
    report.result = approx[..n].to_vec();
    report.dimension = d.m();
    report.converged = converged;
    report.breakdown = d.is_invariant();
    report
}

/// Polynomial Krylov baseline with sub-stepping. Each sub-step `τ ∈ (0, 1]`
/// of the scaled problem runs a fresh Arnoldi process on the current
/// `(n+p)` state with tolerance `tol · τ`; a sub-step that hits `m_max` is
/// halved and restarted.
pub fn expmv_polynomial(
    a: &SparseOperator,
    alpha: f64,
    c_vectors: &[Vec<C64>],
    h: f64,
    opts: &ExpmvOptions,
) -> Result<ExpmvReport, KrylovError> {
    opts.validate()?;
    check_h(h, alpha)?;
    if h == 0.0 {
        return zero_step(a, alpha, c_vectors, opts);
    }
    let scaled = scaled_inputs(c_vectors, h);
    let (aug, mut state) = assemble_augmented(a, alpha * h, &scaled)?;
    let mut report = ExpmvReport::default();
    let mut done = 0.0f64;
    let mut tau = 1.0f64;
    while done < 1.0 {
        tau = tau.min(1.0 - done);
        let mut d = RationalDecomposition::with_reorth(&state, opts.reorth)?;
        let mut next_check = opts.m_min;
        let outcome = loop {
            if d.is_invariant() {
                let ev = d.evaluate(tau)?;
                break Some(ev);
            }
            let m = d.m();
            if m >= next_check || m >= opts.m_max {
                let ev = d.evaluate(tau)?;
                report.estimates.push((m, ev.estimate));
                if ev.estimate <= opts.tol * tau {
                    break Some(ev);
                }
                if m >= opts.m_max {
                    break None;
                }
                next_check = (next_check + opts.cadence).min(opts.m_max);
                continue;
            }
            d.step(&aug, Pole::Infinite, &mut NoSolver)?;
            report.polynomial_steps += 1;
        };
        report.dimension += d.m();
        match outcome {
            Some(ev) => {
                state = ev.approximation;
                done += tau;
                report.substeps += 1;
                if 1.0 - done <= 1e-14 {
                    done = 1.0;
                }
            }
            None => {
                tau *= 0.5;
                if tau < 1e-12 {
                    return Err(KrylovError::SubstepUnderflow { h_sub: tau * h });
                }
            }
        }
    }
    report.result = state[..a.n()].to_vec();
    report.converged = true;
    Ok(report)
}
