use thiserror::Error;

/// Errors raised by the walker model, the integrator and the optimizer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkerError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("time {t} lies outside the reference trajectory domain (starts at {t0})")]
    OutOfDomain { t: f64, t0: f64 },

    #[error("implicit step {step} failed after {iterations} Newton iterations (residual {residual:e})")]
    StepFailure { step: usize, iterations: usize, residual: f64 },

    #[error("singular Newton Jacobian at step {step} (det {det:e})")]
    SingularJacobian { step: usize, det: f64 },

    #[error("impact cap of {cap} exceeded at step {step}; run looks Zeno")]
    ZenoGuard { cap: usize, step: usize },

    #[error("event location failed: {0}")]
    EventLocation(String),

    #[error("invalid problem configuration: {0}")]
    Configuration(String),

    #[error("brute-force search found no finite objective on the grid")]
    EmptyFeasibleGrid,
}

pub type Result<T> = std::result::Result<T, WalkerError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> WalkerError {
    WalkerError::InvalidParameter { name, reason: reason.into() }
}
