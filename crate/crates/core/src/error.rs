use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("closure violation: {0}")]
    Closure(String),
    #[error("untracked kernel: {0}")]
    UntrackedKernel(String),
    #[error("window overflow: {0}")]
    WindowOverflow(String),
    #[error("stabilization failure: {0}")]
    Stabilization(String),
    #[error("incompatible rings: {0}")]
    IncompatibleRings(String),
    #[error("verification failure: {0}")]
    Verification(String),
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("bound exhausted: {0}")]
    BoundExhausted(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema(_) => 2,
            Error::Closure(_) | Error::UntrackedKernel(_) => 3,
            Error::WindowOverflow(_) => 4,
            Error::Stabilization(_) => 5,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
