use canard_core::CanardError;
use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_SINGULAR: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config file {path}, line {line}: {reason}")]
    Config { path: String, line: usize, reason: String },
    /// The computation stopped at a pole or a degenerate configuration. Output written so far is kept.
    #[error("{0}")]
    Singular(String),
    #[error(transparent)]
    Core(#[from] CanardError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json encoding failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => EXIT_USAGE,
            CliError::Singular(_) => EXIT_SINGULAR,
            CliError::Core(e) => match e {
                CanardError::InvalidParameter(_)
                | CanardError::Domain(_)
                | CanardError::Unsupported(_)
                | CanardError::Dimension(_)
                | CanardError::ZeroStep => EXIT_USAGE,
                _ => EXIT_SINGULAR,
            },
            CliError::Io(_) | CliError::Json(_) => EXIT_FAILURE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
