//! Error type shared by every module.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Shapes of the inputs are incompatible.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix entry is NaN or infinite.
    #[error("non-finite entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    /// A tolerance policy with non-positive or inconsistent fields.
    #[error("invalid tolerance policy: {0}")]
    InvalidTolerance(String),

    /// An operation that needs an invertible matrix got a singular one.
    #[error("numerically singular: {0}")]
    Singular(String),

    /// An input does not satisfy a stated hypothesis (not a frame, not a
    /// Riesz basis, not a dual pair, ...).
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A Neumann series whose contraction ratio is not below one.
    #[error("series not guaranteed convergent: contraction ratio {ratio:.6e} >= 1")]
    NotContractive { ratio: f64 },

    /// An identity that the hypotheses guarantee failed numerically. This is
    /// a defect flag, not an expected runtime condition.
    #[error("theorem identity violated: {what} (residual {residual:.6e})")]
    TheoremViolation { what: String, residual: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn violation(what: impl Into<String>, residual: f64) -> Self {
        Error::TheoremViolation {
            what: what.into(),
            residual,
        }
    }
}
