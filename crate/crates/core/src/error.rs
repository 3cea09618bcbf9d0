use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A distribution or kernel received an invalid parameter.
    #[error("invalid parameter `{name}` = {value}")]
    Parameter { name: &'static str, value: f64 },

    /// Cholesky factorization hit a non-positive pivot.
    #[error("matrix is not positive definite: pivot {pivot} is {value}")]
    Decomposition { pivot: usize, value: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    /// A sampler produced a non-finite or otherwise unusable value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("invalid state: {0}")]
    State(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64) -> Self {
        Error::Parameter { name, value }
    }

    /// Wraps an error raised inside a sweep with the sweep index and the
    /// coordinate being updated.
    pub(crate) fn in_sweep(self, sweep: usize, coordinate: &str) -> Self {
        match self {
            Error::Config(_) => self,
            other => Error::Numeric(format!("sweep {sweep}, {coordinate}: {other}")),
        }
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Shape { expected, found })
    }
}
