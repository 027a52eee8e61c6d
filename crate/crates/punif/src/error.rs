use std::io;
use std::path::PathBuf;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// A `verify` property failed, or an unexpected runtime failure.
    pub const FAILURE: u8 = 1;
    /// Gate expression, matrix file or argument could not be parsed.
    pub const PARSE: u8 = 2;
    /// Exact mode would exceed its evaluation budget.
    pub const BUDGET: u8 = 3;
    /// The requested parameter combination is not supported.
    pub const OUT_OF_SCOPE: u8 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid matrix file: {0}")]
    Matrix(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Core(#[from] punif_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use punif_core::Error as E;
        match self {
            CliError::Parse(_) | CliError::Matrix(_) | CliError::Json(_) => exit::PARSE,
            CliError::Core(E::BudgetExceeded { .. }) => exit::BUDGET,
            CliError::Core(E::OutOfScope(_)) => exit::OUT_OF_SCOPE,
            CliError::Core(E::NotPrime(_) | E::InvalidArgument(_)) => exit::PARSE,
            CliError::Core(_) | CliError::Io { .. } => exit::FAILURE,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
