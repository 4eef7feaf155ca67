use alloc::vec::Vec;

use super::{AugmentedOperator, KrylovError};
use crate::linalg::{dense_expm, orthogonal_extend, vector, DenseMatrix, LinalgError};
use crate::poles::Pole;
use crate::solvers::{block_backsubstitute, ShiftedSolver};
use crate::C64;

/// Rational Arnoldi decomposition `Ã V_{m+1} K̲_m = V_{m+1} H̲_m` with
/// orthonormal `V` and start vector `v_1 = c̃ / ‖c̃‖`.
#[derive(Clone, Debug)]
pub struct RationalDecomposition {
    basis: Vec<Vec<C64>>,
    /// Columns of `H̲`; column `j` has `j + 2` entries.
    h: Vec<Vec<C64>>,
    k: Vec<Vec<C64>>,
    poles: Vec<Pole>,
    start_norm: f64,
    invariant: bool,
    reorth: usize,
}

/// Solver effort spent in one Arnoldi step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepInfo {
    pub iterations: usize,
    pub residual: f64,
}

/// Approximant and leading error term for one evaluation time.
#[derive(Clone, Debug)]
pub struct Evaluation {
    /// `‖c̃‖ V_m e^{h F} e_1` with `F = H_m K_m⁻¹`.
    pub approximation: Vec<C64>,
    pub estimate: f64,
}

impl RationalDecomposition {
    pub fn new(start: &[C64]) -> Result<Self, KrylovError> {
        Self::with_reorth(start, 1)
    }

    /// `reorth` extra Gram–Schmidt passes per step.
    pub fn with_reorth(start: &[C64], reorth: usize) -> Result<Self, KrylovError> {
        if start.is_empty() {
            return Err(KrylovError::EmptyInput);
        }
        if !vector::all_finite(start) {
            return Err(KrylovError::NonFinite);
        }
        let start_norm = vector::norm2(start);
        let (basis, invariant) = if start_norm == 0.0 {
            (alloc::vec![start.to_vec()], true)
        } else {
            (alloc::vec![start.iter().map(|z| z / start_norm).collect()], false)
        };
        Ok(Self { basis, h: Vec::new(), k: Vec::new(), poles: Vec::new(), start_norm, invariant, reorth })
    }

    /// Number of completed steps `m`.
    pub fn m(&self) -> usize {
        self.h.len()
    }

    pub fn start_norm(&self) -> f64 {
        self.start_norm
    }

    pub fn is_invariant(&self) -> bool {
        self.invariant
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn basis(&self) -> &[Vec<C64>] {
        &self.basis
    }

    /// `h_{m+1,m}`; zero after a breakdown or before the first step.
    pub fn beta_last(&self) -> f64 {
        self.h.last().map_or(0.0, |col| col[col.len() - 1].re)
    }

    /// `(m+1) × m` matrix `H̲_m`.
    pub fn h_matrix(&self) -> DenseMatrix {
        hessenberg(&self.h, self.m() + 1)
    }

    /// `(m+1) × m` matrix `K̲_m`.
    pub fn k_matrix(&self) -> DenseMatrix {
        hessenberg(&self.k, self.m() + 1)
    }

    /// One rational Arnoldi step with continuation vector `v_m`: `x = Ã v_m`
    /// for `ξ = ∞`, otherwise `(ξ I - Ã) x = ξ Ã v_m`.
    pub fn step(
        &mut self,
        aug: &AugmentedOperator<'_>,
        pole: Pole,
        solver: &mut dyn ShiftedSolver,
    ) -> Result<StepInfo, KrylovError> {
        if self.invariant {
            return Err(KrylovError::Invariant);
        }
        let j = self.m();
        let w = &self.basis[j];
        if w.len() != aug.dim() {
            return Err(KrylovError::DimensionMismatch { expected: aug.dim(), found: w.len() });
        }
        let aw = aug.apply(w);
        let (x, info) = match pole {
            Pole::Infinite => (aw, StepInfo::default()),
            Pole::Finite(xi) => {
                let s = block_backsubstitute(aug, xi, &aw, solver)?;
                (s.x, StepInfo { iterations: s.iterations, residual: s.residual })
            }
        };
        if !vector::all_finite(&x) {
            return Err(KrylovError::NonFinite);
        }
        let ext = orthogonal_extend(&self.basis, &x, self.reorth);
        let mut hcol = ext.h;
        let beta = match ext.v_new {
            Some(v) => {
                self.basis.push(v);
                ext.beta
            }
            None => {
                self.invariant = true;
                0.0
            }
        };
        hcol.push(C64::new(beta, 0.0));
        let inv = pole.inverse();
        let mut kcol: Vec<C64> = hcol.iter().map(|h| h * inv).collect();
        kcol[j] += C64::new(1.0, 0.0);
        self.h.push(hcol);
        self.k.push(kcol);
        self.poles.push(pole);
        Ok(info)
    }

    /// Drops all steps beyond `m`.
    pub fn truncate(&mut self, m: usize) {
        if m >= self.m() {
            return;
        }
        self.h.truncate(m);
        self.k.truncate(m);
        self.poles.truncate(m);
        self.basis.truncate(m + 1);
        self.invariant = false;
    }

    /// `F = H_m K_m⁻¹` by a pivoted solve of `K_mᵀ Fᵀ = H_mᵀ`.
    pub fn projected(&self) -> Result<DenseMatrix, KrylovError> {
        let m = self.m();
        let hm = self.h_matrix().block(0, 0, m, m);
        let km = self.k_matrix().block(0, 0, m, m);
        let lu = km.transpose().lu().map_err(singular)?;
        Ok(lu.solve_matrix(&hm.transpose()).transpose())
    }

    fn km_solve(&self, rhs: &[C64]) -> Result<Vec<C64>, KrylovError> {
        let m = self.m();
        let km = self.k_matrix().block(0, 0, m, m);
        Ok(km.lu().map_err(singular)?.solve(rhs))
    }

    /// Approximant of `e^{hÃ} c̃` and the leading-term error estimate
    /// `h ‖c̃‖ h_{m+1,m} |e_mᵀ K_m⁻¹ φ_1(h F) e_1|`, both read off one
    /// exponential of `[[hF, e_1], [0, 0]]`.
    pub fn evaluate(&self, h: f64) -> Result<Evaluation, KrylovError> {
        let m = self.m();
        if m == 0 || self.start_norm == 0.0 {
            let approximation = self.basis[0].iter().map(|z| z * self.start_norm).collect();
            return Ok(Evaluation { approximation, estimate: 0.0 });
        }
        let e = self.phi_block(h, 1)?;
        let y: Vec<C64> = (0..m).map(|i| e[(i, 0)]).collect();
        let mut approximation = vector::zeros(self.basis[0].len());
        for (v, yi) in self.basis.iter().zip(&y) {
            vector::axpy(yi * self.start_norm, v, &mut approximation);
        }
        let estimate = if h == 0.0 || self.beta_last() == 0.0 {
            0.0
        } else {
            let phi1: Vec<C64> = (0..m).map(|i| e[(i, m)]).collect();
            let u = self.km_solve(&phi1)?;
            h * self.start_norm * self.beta_last() * u[m - 1].norm()
        };
        Ok(Evaluation { approximation, estimate })
    }

    /// `‖c̃‖ V_m e^{h F} e_1`.
    pub fn approximant(&self, h: f64) -> Result<Vec<C64>, KrylovError> {
        Ok(self.evaluate(h)?.approximation)
    }

    pub fn error_estimate(&self, h: f64) -> Result<f64, KrylovError> {
        Ok(self.evaluate(h)?.estimate)
    }

    /// Norm of the error series truncated after `terms` summands:
    /// `h ‖c̃‖ h_{m+1,m} ‖Σ_k γ_k (hÃ)^{k-1} v_{m+1}‖` with
    /// `γ_k = e_mᵀ K_m⁻¹ φ_k(hF) e_1`.
    pub fn full_error_expansion(&self, aug: &AugmentedOperator<'_>, h: f64, terms: usize) -> Result<f64, KrylovError> {
        if terms == 0 {
            return Err(KrylovError::InvalidParameter("terms must be at least 1"));
        }
        let m = self.m();
        let beta = self.beta_last();
        if m == 0 || h == 0.0 || beta == 0.0 || self.start_norm == 0.0 {
            return Ok(0.0);
        }
        let e = self.phi_block(h, terms)?;
        let mut gammas = Vec::with_capacity(terms);
        for k in 1..=terms {
            let phik: Vec<C64> = (0..m).map(|i| e[(i, m + k - 1)]).collect();
            gammas.push(self.km_solve(&phik)?[m - 1]);
        }
        if terms == 1 {
            return Ok(h * self.start_norm * beta * gammas[0].norm());
        }
        let mut term = self.basis[m].clone();
        let mut sum = vector::zeros(term.len());
        for (k, g) in gammas.iter().enumerate() {
            if k > 0 {
                term = aug.apply(&term);
                vector::scale(C64::new(h, 0.0), &mut term);
            }
            vector::axpy(*g, &term, &mut sum);
        }
        Ok(h * self.start_norm * beta * vector::norm2(&sum))
    }

    /// Residual of the Arnoldi relation, `‖Ã V K̲ - V H̲‖_F`.
    pub fn relation_residual(&self, aug: &AugmentedOperator<'_>) -> f64 {
        let m = self.m();
        let rows = self.basis.len();
        let mut total = 0.0;
        for j in 0..m {
            let mut vk = vector::zeros(self.basis[0].len());
            let mut vh = vector::zeros(self.basis[0].len());
            for i in 0..rows.min(j + 2) {
                vector::axpy(self.k[j][i], &self.basis[i], &mut vk);
                vector::axpy(self.h[j][i], &self.basis[i], &mut vh);
            }
            let r = vector::sub(&aug.apply(&vk), &vh);
            let n = vector::norm2(&r);
            total += n * n;
        }
        crate::math::sqrt(total)
    }

    /// `exp([[hF, E], [0, J_t]])` with `E = [e_1, 0, …]`; column `m + k - 1`
    /// of the top block is `φ_k(hF) e_1`.
    fn phi_block(&self, h: f64, terms: usize) -> Result<DenseMatrix, KrylovError> {
        let m = self.m();
        let f = self.projected()?;
        let mut w = DenseMatrix::zeros(m + terms, m + terms);
        for i in 0..m {
            for j in 0..m {
                w[(i, j)] = f[(i, j)] * h;
            }
        }
        w[(0, m)] = C64::new(1.0, 0.0);
        for i in 0..terms - 1 {
            w[(m + i, m + i + 1)] = C64::new(1.0, 0.0);
        }
        Ok(dense_expm(&w)?)
    }
}

fn singular(e: LinalgError) -> KrylovError {
    match e {
        LinalgError::Singular { .. } => KrylovError::SingularK,
        other => KrylovError::Linalg(other),
    }
}

fn hessenberg(cols: &[Vec<C64>], rows: usize) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(rows, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            out[(i, j)] = *v;
        }
    }
    out
}
