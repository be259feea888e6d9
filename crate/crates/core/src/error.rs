use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("empty integration span: start and end are both {0}")]
    EmptySpan(f64),

    #[error("step size controller failed near y = {y}")]
    StepFailure { y: f64 },

    #[error("integration overflowed near y = {y} before reaching the requested span")]
    Overflow { y: f64 },

    #[error("position {y} outside covered range [{lo}, {hi}]")]
    OutOfRange { y: f64, lo: f64, hi: f64 },

    #[error("parameter mismatch: {0}")]
    ParamsMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigenvalue iteration did not converge for index {0}")]
    NoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
