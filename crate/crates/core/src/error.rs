use thiserror::Error;

/// Errors raised by the accountant.
///
/// Every variant maps onto one of the process exit codes used by the
/// command-line front end (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("enumeration cap exceeded: {atoms} histogram atoms > cap {cap}; use the sampling (montecarlo) path instead")]
    CapExceeded { atoms: f64, cap: f64 },

    #[error("numerically degenerate: {0}")]
    Degenerate(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Process exit code: 2 for bad input, 3 for resource caps, 4 for
    /// internal invariant failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Degenerate(_) | Error::Json(_) | Error::Io(_) => 2,
            Error::CapExceeded { .. } => 3,
            Error::Invariant(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
