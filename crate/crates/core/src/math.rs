//! Float intrinsics routed through `num_traits::Float`, which resolves to
//! `std` or `libm` depending on the enabled feature.

use num_traits::Float;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    Float::sqrt(x)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    Float::log2(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    Float::ceil(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    Float::cos(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    Float::abs(x)
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    Float::powi(x, n)
}

