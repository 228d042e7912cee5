//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("quadrature degree {available} is below the required {required}")]
    DegreeTooLow { required: usize, available: usize },

    #[error("band limit exhausted: best attainable split residual {achievable:.3e} ≥ requested {requested:.3e}")]
    ResolutionExhausted { requested: f64, achievable: f64 },

    #[error("matrix is not orthogonal (defect {0:.3e})")]
    NotARotation(f64),

    #[error("field is numerically zero")]
    ZeroField,

    #[error("degenerate iteration: {0}")]
    Degenerate(String),

    #[error("ball field carries no evaluator and cannot be sampled off its grid")]
    NotEvaluable,

    #[error("multiplier must be positive, got {0:.3e}")]
    NonPositiveMultiplier(f64),

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("parse error in {what}: {detail}")]
    Parse { what: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn parse(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Parse {
            what: what.into(),
            detail: detail.into(),
        }
    }
}
