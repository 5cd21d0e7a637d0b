//! Convergence harness for the MTI-FP Klein-Gordon solver: the rustfft
//! backend, the reference store, sweeps, CSV reports, traces and
//! configuration loading. The numerics live in `mtifp-core`.

pub mod config;
pub mod fft;
pub mod report;
pub mod store;
pub mod sweep;
pub mod traces;

pub use fft::{RustFft, RustFftFactory};
