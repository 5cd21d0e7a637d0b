use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("unsupported Sobolev order {0}")]
    UnsupportedOrder(u32),
    #[error("eps must lie in (0, 1], got {0}")]
    EpsOutOfRange(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("T/tau = {ratio} is not an integer step count")]
    StepCount { ratio: f64 },
    #[error("non-finite state at step {step} (H2 norm {norm})")]
    Divergence { step: usize, norm: f64 },
    #[error("decomposition is at the {found} stage, expected {expected}")]
    StageMismatch { expected: &'static str, found: &'static str },
    #[error("real fast path needs real u and eps^2 u_dot (imaginary part {imag:e})")]
    NotReal { imag: f64 },
    #[error("quadrature needs {needed} panels, budget is {budget}")]
    QuadratureBudget { needed: u64, budget: u64 },
    #[error("ODE integrator used {steps} steps and stopped at t = {t}")]
    StepBudget { t: f64, steps: usize },
    #[error("ODE step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
