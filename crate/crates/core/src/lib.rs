//! Multiscale time integrator with Fourier pseudospectral discretization
//! (MTI-FP) for the Klein-Gordon equation
//!
//! ```text
//! ε² ∂ₜₜu − ∂ₓₓu + u/ε² + λ|u|²u = 0,   x ∈ (a, b) periodic,
//! ```
//!
//! uniformly accurate in `0 < ε ≤ 1`. The crate is `no_std` and needs only
//! `alloc`; transforms are pluggable through [`fft::Transform`].
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod coeffs;
pub mod error;
pub mod fft;
pub mod math;
pub mod mdf;
pub mod nonlinearity;
pub mod ode;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use math::C64;
