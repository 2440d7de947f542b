use thiserror::Error;

/// Errors raised across the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeomError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("singular bath parameters: {0}")]
    Singularity(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("ADO not found: {0}")]
    NotFound(String),
    #[error("hierarchy too large: {count} ADOs exceed the memory budget of {budget} bytes")]
    SpaceTooLarge { count: u128, budget: usize },
    #[error("step size underflow at t = {t}: the system looks stiff, try the propagator method or a smaller tier")]
    Stiff { t: f64 },
    #[error("steady state is not unique (singular trace-constrained system)")]
    Multiplicity,
    #[error("solver failure: {msg} (residual {residual:e})")]
    Solver { msg: String, residual: f64 },
    #[error("decode error: {0}")]
    Decode(String),
}

pub type Result<T> = std::result::Result<T, HeomError>;
