use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter set violates one of the model constraints.
    #[error("constraint violated ({constraint}): {detail}")]
    Constraint {
        constraint: &'static str,
        detail: String,
    },

    /// An argument is outside the domain of the requested operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A text row could not be parsed.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Sampling epochs are not uniformly spaced.
    #[error("irregular sampling at line {line}: gap {gap} differs from {expected} by more than {tolerance}")]
    IrregularSpacing {
        line: usize,
        gap: f64,
        expected: f64,
        tolerance: f64,
    },

    /// An internal invariant failed. Never expected for valid inputs.
    #[error("internal consistency fault: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn constraint(constraint: &'static str, detail: impl Into<String>) -> Self {
        Error::Constraint {
            constraint,
            detail: detail.into(),
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
