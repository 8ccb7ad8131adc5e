use thiserror::Error;

/// Errors raised by the library.
///
/// The CLI maps [`Error::is_numeric`] failures to exit code 3 and every other
/// variant to exit code 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("truncation too small: need K >= {needed}, got {got}")]
    Truncation { needed: usize, got: usize },
    #[error("aliasing: {samples} samples cannot resolve modes |k| <= {k_max} (need at least {needed})")]
    Aliasing {
        samples: usize,
        k_max: usize,
        needed: usize,
    },
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
