use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("probability level {0} is outside (0, 1)")]
    LevelOutOfRange(f64),
    #[error("moment does not exist: {0}")]
    MomentUndefined(String),
    #[error("numerical integration did not converge (value {value:e}, error estimate {error:e})")]
    Quadrature { value: f64, error: f64 },
    #[error("root finding failed: {0}")]
    RootFinding(String),
    #[error("outside the score domain: {0}")]
    Domain(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("model fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
