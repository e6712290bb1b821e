use thiserror::Error;

/// Errors raised by space construction, queries and the covering/inequality routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point index {index} out of range for a space of {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("theta must lie strictly inside (0, 1), got {0}")]
    ThetaOutOfRange(f64),

    #[error("function value at point {index} is not finite")]
    NonFiniteValue { index: usize },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("operation requires a geodesic (graph-mode) space")]
    NotGeodesic,

    #[error("operation requires at least two points")]
    TooFewPoints,

    #[error("empty set where a nonempty one is required: {0}")]
    EmptySet(&'static str),

    /// A mathematical hypothesis of a construction or inequality does not hold
    /// for the supplied input. `hypothesis` names it, `detail` carries the
    /// offending numbers.
    #[error("precondition violated ({hypothesis}): {detail}")]
    Precondition {
        hypothesis: &'static str,
        detail: String,
    },

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn precondition(hypothesis: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition {
            hypothesis,
            detail: detail.into(),
        }
    }

    /// True for violated mathematical hypotheses and out-of-range parameters,
    /// as opposed to I/O and parse failures.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Parse { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(Error::ThetaOutOfRange(theta))
    }
}
