use alloc::vec::Vec;

use super::ExpmvInput;
use crate::krylov::{expmv_polynomial, expmv_rational, ExpmvOptions, ExpmvReport, KrylovError};
use crate::linalg::{vector, SparseOperator};
use crate::poles::PoleSet;
use crate::solvers::{ShiftedSolver, SolverStats};
use crate::C64;

/// Evaluates `Σ_l h^l φ_l(-h A) c_l` for the time stepper.
pub trait ExpmvEngine {
    fn expmv(&mut self, a: &SparseOperator, input: &ExpmvInput) -> Result<ExpmvReport, KrylovError>;

    fn name(&self) -> &'static str;

    fn solver_stats(&self) -> SolverStats {
        SolverStats::default()
    }
}

fn complex_inputs(input: &ExpmvInput) -> Vec<Vec<C64>> {
    input.vectors.iter().map(|v| vector::to_complex(v)).collect()
}

/// Rational Krylov engine owning its pole set and shifted solver.
#[derive(Debug)]
pub struct RationalEngine<S> {
    pub poles: PoleSet,
    pub options: ExpmvOptions,
    pub solver: S,
}

impl<S: ShiftedSolver> RationalEngine<S> {
    pub fn new(poles: PoleSet, options: ExpmvOptions, solver: S) -> Self {
        Self { poles, options, solver }
    }
}

impl<S: ShiftedSolver> ExpmvEngine for RationalEngine<S> {
    fn expmv(&mut self, a: &SparseOperator, input: &ExpmvInput) -> Result<ExpmvReport, KrylovError> {
        expmv_rational(a, 1.0, &complex_inputs(input), input.h, &self.poles, &self.options, &mut self.solver)
    }

    fn name(&self) -> &'static str {
        "rational"
    }

    fn solver_stats(&self) -> SolverStats {
        self.solver.stats()
    }
}

/// Polynomial Krylov baseline with sub-stepping.
#[derive(Clone, Copy, Debug)]
pub struct PolynomialEngine {
    pub options: ExpmvOptions,
}

impl PolynomialEngine {
    pub fn new(options: ExpmvOptions) -> Self {
        Self { options }
    }
}

impl Default for PolynomialEngine {
    fn default() -> Self {
        Self::new(ExpmvOptions::polynomial())
    }
}

impl ExpmvEngine for PolynomialEngine {
    fn expmv(&mut self, a: &SparseOperator, input: &ExpmvInput) -> Result<ExpmvReport, KrylovError> {
        expmv_polynomial(a, 1.0, &complex_inputs(input), input.h, &self.options)
    }

    fn name(&self) -> &'static str {
        "polynomial"
    }
}
