//! Helpers on complex slices. Inner products conjugate the left argument.

use alloc::vec::Vec;

use crate::{math, C64};

pub fn zeros(n: usize) -> Vec<C64> {
    alloc::vec![C64::new(0.0, 0.0); n]
}

pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    let mut s = C64::new(0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        s += a.conj() * b;
    }
    s
}

pub fn norm2(x: &[C64]) -> f64 {
    math::sqrt(x.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

pub fn norm2_real(x: &[f64]) -> f64 {
    math::sqrt(x.iter().map(|v| v * v).sum::<f64>())
}

pub fn norm_inf_real(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| if math::abs(*v) > m { math::abs(*v) } else { m })
}

/// `y += a x`
pub fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn scale(a: C64, x: &mut [C64]) {
    for v in x {
        *v *= a;
    }
}

pub fn sub(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn to_complex(x: &[f64]) -> Vec<C64> {
    x.iter().map(|&v| C64::new(v, 0.0)).collect()
}

pub fn real_part(x: &[C64]) -> Vec<f64> {
    x.iter().map(|z| z.re).collect()
}

pub fn max_abs_imag(x: &[C64]) -> f64 {
    x.iter().fold(0.0, |m, z| if math::abs(z.im) > m { math::abs(z.im) } else { m })
}

pub fn all_finite(x: &[C64]) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
