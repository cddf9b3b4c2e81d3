use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The CLI maps [`Error::Spec`] to exit code 2 and [`Error::Capacity`] to
/// exit code 3; everything else exits with 1.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid subgroup: {0}")]
    InvalidSubgroup(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("empty system: {0}")]
    EmptySystem(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("unsupported interaction: {0}")]
    UnsupportedInteraction(String),

    #[error("incomplete coset family: {0}")]
    IncompleteFamily(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("spec error at {path}: {message}")]
    Spec { path: String, message: String },
}

impl Error {
    pub(crate) fn dim(expected: usize, found: usize) -> Self {
        Error::Dimension { expected, found }
    }

    pub(crate) fn spec(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Spec {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
