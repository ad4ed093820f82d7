use thiserror::Error;

use crate::codec::CodecError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Codec(#[from] CodecError),

    /// A caller handed an operation arguments that break its contract
    /// (mismatched dimensions, empty pattern lists, nonpositive scores).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("value {value} is outside [0, {max}] for {what}")]
    Range {
        what: &'static str,
        value: f64,
        max: f64,
    },

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("{0}")]
    Data(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    /// A single sweep or bench run failed; carries the run's identity.
    #[error("run with value {value} and seed {seed} failed: {source}")]
    Run {
        value: f64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 usage, 2 data, 3 internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::Codec(CodecError::InvalidProtection(_)) => 1,
            Error::Contract(_)
            | Error::Range { .. }
            | Error::Parse { .. }
            | Error::Data(_)
            | Error::Io { .. } => 2,
            Error::Codec(_) | Error::Internal(_) => 3,
            Error::Run { source, .. } => source.exit_code(),
        }
    }
}
