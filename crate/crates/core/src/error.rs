use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("inadmissible triple: {0}")]
    Inadmissible(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("inconsistent zero set: {0}")]
    InconsistentZeroSet(String),
    #[error("insufficient samples: need at least {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },
    #[error("not on a single ray: {0}")]
    NotOnRay(String),
    #[error("mismatched point processes: {0}")]
    Mismatch(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
