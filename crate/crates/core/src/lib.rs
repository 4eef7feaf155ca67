//! Exponential Runge–Kutta integration of stiff semi-linear systems
//! `u' = -A u + g(t, u)` driven by an adaptive rational Krylov
//! approximation of `exp(h Ã) c̃`.
//!
//! The crate is `no_std` with `alloc`. The default `std` feature adds the
//! approximate minimum degree ordering used by the direct solver; without
//! it, enable `libm` for the floating-point intrinsics.
//!
//! Layout:
//! - [`linalg`]: sparse CSR operators, small dense matrices, `expm`, φ-functions,
//!   Gram–Schmidt extension.
//! - [`problems`]: finite-difference and graph Laplacians, reaction terms,
//!   initial data.
//! - [`solvers`]: shifted linear systems `(ξ I + α A) x = b`.
//! - [`poles`]: pole sets for the rational Krylov space.
//! - [`krylov`]: augmented operator, rational Arnoldi, error estimates and
//!   the adaptive `expmv` drivers.
//! - [`integrators`]: tableau registry and the time-stepping loop.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("expkrylov-core needs either the `std` or the `libm` feature");

extern crate alloc;

pub mod integrators;
pub mod krylov;
pub mod linalg;
pub(crate) mod math;
pub mod poles;
pub mod problems;
pub mod solvers;

pub use num_complex::Complex;

/// Complex double precision scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
