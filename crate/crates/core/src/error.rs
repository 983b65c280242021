use thiserror::Error;

/// Failure raised by an objective evaluator (e.g. a simulator breakdown).
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct EvalError(pub String);

impl EvalError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("point is outside the feasible box")]
    Infeasible,

    #[error("budget exhausted: batch of {requested} exceeds remaining {remaining}")]
    BudgetExhausted { requested: usize, remaining: usize },

    #[error("evaluation {index} failed: {source}")]
    Evaluation { index: usize, source: EvalError },

    #[error("numeric degeneracy: covariance eigenvalue {eigenvalue:e} is not positive")]
    NumericDegeneracy { eigenvalue: f64 },

    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
