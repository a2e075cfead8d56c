use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value passed to {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A batch did not fit into the remaining budget. The batch was refused
    /// whole; `consumed` is the count at the moment of refusal.
    #[error("budget exhausted: {consumed} of {limit} calls consumed, batch of {requested} refused")]
    BudgetExhausted {
        consumed: u64,
        limit: u64,
        requested: u64,
    },

    #[error("sample-size schedule overflows at iteration {0}")]
    ScheduleOverflow(usize),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("metric unavailable: {0}")]
    MetricUnavailable(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn is_budget_exhausted(&self) -> bool {
        matches!(self, Error::BudgetExhausted { .. })
    }
}
