//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A state or tendency stopped being finite; carries the step index
    /// at which the problem was detected.
    #[error("non-finite value in {context} at step {step}")]
    NonFinite { context: &'static str, step: u64 },
    /// Shallow-water depth dropped to zero or below.
    #[error("non-positive depth (min eta = {min_eta:.3e}) at step {step}")]
    DepthNonPositive { min_eta: f64, step: u64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// A binary file did not match the expected layout.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
