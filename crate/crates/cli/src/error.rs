use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("unknown family '{0}'")]
    UnknownFamily(String),

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("nothing to draw")]
    EmptyInput,

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] pseudospec_core::Error),

    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Self::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use pseudospec_core::Error as E;
        match self {
            Self::Core(
                E::InvalidArgument(_)
                | E::InvalidMatrix(_)
                | E::InvalidPattern(_)
                | E::DimensionMismatch { .. },
            ) => EXIT_VALIDATION,
            Self::Core(_) | Self::CheckFailed(_) => EXIT_NUMERIC,
            _ => EXIT_VALIDATION,
        }
    }
}
