use alloc::vec::Vec;

use super::vector::{dot, norm2};
use crate::C64;

/// Relative threshold on `beta / ‖x‖` below which the extension counts as a
/// breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-12;

/// Result of one Gram–Schmidt extension: `x = V h + beta v_new`.
#[derive(Clone, Debug)]
pub struct Extension {
    pub h: Vec<C64>,
    pub beta: f64,
    /// `None` signals a breakdown: `x` lies in the span of `V`.
    pub v_new: Option<Vec<C64>>,
}

impl Extension {
    pub fn is_breakdown(&self) -> bool {
        self.v_new.is_none()
    }
}

/// Classical Gram–Schmidt with `reorth` additional passes.
pub fn orthogonal_extend(basis: &[Vec<C64>], x: &[C64], reorth: usize) -> Extension {
    let x_norm = norm2(x);
    let mut w = x.to_vec();
    let mut h = alloc::vec![C64::new(0.0, 0.0); basis.len()];
    for _ in 0..=reorth {
        let coeffs: Vec<C64> = basis.iter().map(|v| dot(v, &w)).collect();
        for (v, c) in basis.iter().zip(&coeffs) {
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= c * vi;
            }
        }
        for (hi, c) in h.iter_mut().zip(coeffs) {
            *hi += c;
        }
    }
    let beta = norm2(&w);
    if x_norm == 0.0 || beta <= BREAKDOWN_TOL * x_norm {
        return Extension { h, beta, v_new: None };
    }
    let inv = 1.0 / beta;
    for wi in &mut w {
        *wi *= inv;
    }
    Extension { h, beta, v_new: Some(w) }
}
