use thiserror::Error;

/// Library-wide error type. Variants map onto the failure classes the
/// operations can actually hit; domain errors carry enough context to be
/// actionable from the CLI without a backtrace.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too small: {0}")]
    Grid(String),

    #[error("support violation: {0}")]
    Support(String),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("smoothness error: {0}")]
    Smoothness(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("non-contraction: {0}")]
    NonContraction(String),

    #[error("rough-path mismatch: {0}")]
    RoughPath(String),

    #[error("localization failure: {0}")]
    Localization(String),

    #[error("sampler error: {0}")]
    Sampler(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
