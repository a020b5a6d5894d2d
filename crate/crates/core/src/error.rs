use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A domain object failed validation (bad bounds, dangling references, ...).
    #[error("validation: {0}")]
    Validation(String),

    /// An enumeration or solve was refused because it would exceed a guard.
    #[error("guard exceeded: {0}")]
    Guard(String),

    /// A CSP referenced a variable that does not exist.
    #[error("malformed csp: {0}")]
    MalformedCsp(String),

    /// An evaluator could not produce a result.
    #[error("evaluator: {0}")]
    Evaluator(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialisation: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    /// Internal invariant broken; always a bug.
    #[error("internal: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
