use thiserror::Error;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole of the zeta function at s = 1")]
    Pole,

    /// The requested tolerance cannot be certified at this height.
    #[error("precision failure at t = {t}: requested {requested:e}, best certified bound {achieved:e}")]
    Precision { t: f64, requested: f64, achieved: f64 },

    /// The Euler-product factor is numerically zero, so the ratio L/P_X is undefined.
    #[error("singular point at t = {t}: |P_X| = {magnitude:e}")]
    Singular { t: f64, magnitude: f64 },

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
