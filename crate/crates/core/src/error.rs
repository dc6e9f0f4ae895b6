use thiserror::Error;

/// Errors raised by the simulation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VbiError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("ill-posed model: matrix not positive definite at pivot {pivot} (value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error(
        "eigen solver did not converge after {iterations} iterations \
         (residual {residual:e}, stiffness condition estimate {condition:e})"
    )]
    EigenNoConvergence {
        iterations: usize,
        residual: f64,
        condition: f64,
    },

    #[error("time integration diverged at step {step}")]
    Diverged { step: usize },

    #[error("step size underflow at t = {time} (h = {step:e})")]
    StepSizeUnderflow { time: f64, step: f64 },

    #[error("cannot re-solve a step before any step has been taken")]
    NoPriorStep,

    #[error(
        "compatibility iteration did not converge at step {step} after {iterations} \
         iterations (residual {residual:e} m)"
    )]
    CompatibilityNotConverged {
        step: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("resonance pole: {0}")]
    Pole(&'static str),

    #[error("singular system: {0}")]
    Singular(&'static str),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T, E = VbiError> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> VbiError {
    VbiError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
