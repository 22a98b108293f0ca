use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised across the toolkit.
///
/// The CLI maps each variant onto a process exit code via [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("calibration failed at point {point}: {reason}")]
    Calibration { point: String, reason: String },

    #[error("training failed: {0}")]
    Training(String),

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("timestamp ordering violated at line {line}: {message}")]
    Ordering { line: usize, message: String },

    #[error("unsupported format version: expected {expected}, found {found}")]
    Version { expected: String, found: String },

    #[error("malformed file: {0}")]
    Malformed(String),

    #[error("checksum mismatch: stored {stored}, computed {computed}")]
    Checksum { stored: String, computed: String },

    #[error("method/profile mismatch: {0}")]
    Mismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn calibration(point: impl ToString, reason: impl Into<String>) -> Self {
        Error::Calibration {
            point: point.to_string(),
            reason: reason.into(),
        }
    }

    /// Process exit code: 2 for data/format problems, 3 for calibration or
    /// training failures. Usage errors (1) are produced by the argument parser.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Calibration { .. } | Error::Training(_) => 3,
            _ => 2,
        }
    }
}
