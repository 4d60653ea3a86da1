//! Spectral kernels for the defocusing wave equation
//! `∂ₜ²u − Δu + |u|^{p−1}u = 0` on `T³` with randomized initial data.
//!
//! The crate is `no_std` (it needs `alloc`) and holds only pure numerics:
//! Fourier fields and transforms, the randomization map, Littlewood-Paley
//! calculus, exact free propagators, the nonlinear solvers and the Monte
//! Carlo experiment kernels. File formats, configuration and the command
//! line live in the `supwave` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod fft;

pub mod ensemble;
pub mod field;
pub mod lp;
pub mod propagator;
pub mod randomize;
pub mod solver;
pub mod stats;

pub use error::{Error, Result};
pub use field::{analyze, synthesize, CauchyPair, FourierField, GridValues, Mode, RealBasis, RealTerm, SpectralWorkspace};
pub use num_complex::Complex64;
