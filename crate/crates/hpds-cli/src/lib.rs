//! Library side of the `hpds` command-line tool: the versioned JSON model
//! file schema, report files, and the small parsers for vector and
//! control-signal literals. Kept as a library target so the fuzz harness
//! can drive every parser entry point directly.

pub mod commands;
pub mod literal;
pub mod model_file;
pub mod report;

use std::path::PathBuf;

/// CLI-level errors, mapped onto process exit codes: 2 for input/parse
/// problems, 3 for violated preconditions, 4 for numerical failures.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] hpds::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                hpds::Error::Numerical(_) => 4,
                _ => 3,
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type CliResult<T> = Result<T, CliError>;
