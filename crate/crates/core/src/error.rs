use thiserror::Error;

/// Errors raised by domain, metric and graph operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KobError {
    /// Malformed arguments: dimension mismatch, zero vectors, bad parameters.
    #[error("input error: {0}")]
    Input(String),
    /// A point or curve is not where the operation requires it to be.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("grid budget exceeded: {nodes} nodes > {limit}")]
    GridBudget { nodes: usize, limit: usize },
    #[error("unreachable: {0}")]
    Unreachable(String),
}

pub type Result<T> = std::result::Result<T, KobError>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(KobError::Input(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(KobError::Domain(msg.into()))
}
