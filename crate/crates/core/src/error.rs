use thiserror::Error;

/// Errors raised by the linear algebra, recovery and guarantee routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is rank deficient: smallest/largest triangular pivot ratio {ratio:e}")]
    RankDeficient { ratio: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("no usable candidate outside the current support")]
    NoCandidate,

    #[error("outside the formula's domain: {reason} (value {value})")]
    Domain { reason: String, value: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("closed-form root {closed_form} and bisection root {bisection} disagree")]
    InconsistentRoots { closed_form: f64, bisection: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(reason: impl Into<String>, value: f64) -> Self {
        Error::Domain {
            reason: reason.into(),
            value,
        }
    }

    /// Short machine-readable tag, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::RankDeficient { .. } => "RankDeficient",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::InvalidMatrix(_) => "InvalidMatrix",
            Error::NoCandidate => "NoCandidate",
            Error::Domain { .. } => "DomainError",
            Error::InvalidState(_) => "InvalidState",
            Error::InconsistentRoots { .. } => "InconsistentRoots",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Parse(_) => "ParseError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
