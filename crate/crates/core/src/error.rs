use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("quantum-number parity violation: {0}")]
    ParityViolation(String),

    #[error("invalid quantum-number configuration: {0}")]
    InvalidConfig(String),

    #[error("no convergence after {iterations} Newton steps (best residual {best_residual:.3e})")]
    NonConvergence { iterations: usize, best_residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
