use thiserror::Error;

/// Errors raised while building problems, configurations or runs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("{operation} is not defined for the {family} family")]
    UnsupportedFamily {
        operation: &'static str,
        family: &'static str,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("energy tracking requires the time-conjugate momentum to be initialised")]
    MissingTimeMomentum,

    #[error(transparent)]
    Step(#[from] StepError),

    #[error("{context}: {message}")]
    Io { context: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),
}

/// Failure of a single integrator step. The harness records these as divergence.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error("coefficient overflow: exponent {log_magnitude:.3} exceeds the floating-point range")]
    Saturated { log_magnitude: f64 },

    #[error("implicit time update did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("physical time left the positive axis: {0}")]
    TimeOutOfDomain(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
