use thiserror::Error;

/// Errors produced by the numerical kernel and everything built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("non-finite value at {0}")]
    NonFinite(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Divergence { epoch: usize },
}

impl Error {
    /// True for failures caused by numerically degenerate data rather than
    /// malformed arguments.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_)
                | Error::UndefinedCorrelation(_)
                | Error::NoConvergence { .. }
                | Error::Divergence { .. }
        )
    }

    /// Short stable identifier for the error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::InvalidInput(_) => "invalid-input",
            Error::NonFinite(_) => "non-finite",
            Error::Degenerate(_) => "degenerate",
            Error::UndefinedCorrelation(_) => "undefined-correlation",
            Error::NoConvergence { .. } => "no-convergence",
            Error::Divergence { .. } => "divergence",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
