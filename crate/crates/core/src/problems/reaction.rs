use alloc::vec::Vec;

use super::ProblemError;

/// `u - u³`, or `(u - u³)/ε` when `scaled`.
pub fn reaction_allen_cahn(u: &[f64], eps: f64, scaled: bool) -> Vec<f64> {
    let s = if scaled { 1.0 / eps } else { 1.0 };
    u.iter().map(|&x| s * (x - x * x * x)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GiererMeinhardtParams {
    pub da: f64,
    pub dh: f64,
    pub p: f64,
    pub mu: f64,
    pub p_prime: f64,
    pub nu: f64,
    /// Lower bound applied to the inhibitor in the `a²/h` term.
    pub floor: f64,
}

impl Default for GiererMeinhardtParams {
    fn default() -> Self {
        Self { da: 0.005, dh: 0.5, p: 16.0, mu: 16.0, p_prime: 16.0, nu: 16.0, floor: 1e-12 }
    }
}

impl GiererMeinhardtParams {
    pub fn validate(&self) -> Result<(), ProblemError> {
        let fields = [
            ("D_a", self.da),
            ("D_h", self.dh),
            ("p", self.p),
            ("mu", self.mu),
            ("p'", self.p_prime),
            ("nu", self.nu),
            ("floor", self.floor),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ProblemError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }
}

/// `g_a = p a²/max(h, δ) - μ a`, `g_h = p' a² - ν h`.
pub fn reaction_gierer_meinhardt(a: &[f64], h: &[f64], prm: &GiererMeinhardtParams) -> (Vec<f64>, Vec<f64>) {
    let ga = a.iter().zip(h).map(|(&a, &h)| prm.p * a * a / h.max(prm.floor) - prm.mu * a).collect();
    let gh = a.iter().zip(h).map(|(&a, &h)| prm.p_prime * a * a - prm.nu * h).collect();
    (ga, gh)
}
