use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate conditioning: variable {index} has variance {variance}")]
    DegenerateConditioning { index: usize, variance: f64 },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("unphysical envelope: δκ = {0} must be < 1")]
    UnphysicalEnvelope(f64),
    #[error("projection annihilates the state: {0}")]
    ImpossibleOutcome(String),
    #[error("grid oracle capacity exceeded: {0}")]
    Capacity(String),
    #[error("grid aliasing: {0}")]
    Aliasing(String),
    #[error("internal consistency: {0}")]
    InternalConsistency(String),
    #[error("post-selection exhausted after {attempts} attempts")]
    PostSelectionExhausted { attempts: usize },
    #[error("script error at step {step}: {message}")]
    Script { step: usize, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
