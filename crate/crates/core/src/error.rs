use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("invalid covariance matrix: {0}")]
    InvalidCm(String),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("degenerate filter: projection probability {0} too small")]
    DegenerateFilter(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("bracket error: {0}")]
    Bracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;
