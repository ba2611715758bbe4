use thiserror::Error;

/// Errors produced by the fair-division toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented invariant. `path` names the failing
    /// field (for file inputs, a JSON-pointer-like path into the document).
    #[error("invalid {path}: {reason}")]
    Invalid { path: String, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("unknown axis `{0}`")]
    UnknownAxis(String),

    /// Inputs sit on a point where the procedure has more than one valid
    /// output (identical adjusted-winner valuations, announcement equal to
    /// Bob's valuation).
    #[error("ambiguous input: {0}")]
    Ambiguous(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("information set is unreachable under the perturbed profile: {0}")]
    Unreachable(String),

    #[error("horizon n = {n} exceeds the cap {cap} for {what}")]
    HorizonTooLong { n: usize, cap: usize, what: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
