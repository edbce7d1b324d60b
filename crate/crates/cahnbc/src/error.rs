use std::path::PathBuf;

use crate::config::Violation;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot parse {}: {message}", .path.display())]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration ({} problem(s)):\n{}", .0.len(), list(.0))]
    Validation(Vec<Violation>),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Core(#[from] cahnbc_core::Error),
    #[error("acceptance check failed: {0}")]
    Acceptance(String),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed field file {}: {message}", .path.display())]
    Snapshot { path: PathBuf, message: String },
    #[error("malformed table {}: {message}", .path.display())]
    Table { path: PathBuf, message: String },
    #[error("plotting failed: {0}")]
    Plot(String),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|x| format!("  - {x}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// Process exit code: 1 configuration, 2 solver, 3 acceptance, 4 I/O.
    pub fn exit_code(&self) -> u8 {
        use cahnbc_core::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Validation(_) | CliError::Usage(_) => 1,
            CliError::Core(E::InvalidParameter(_) | E::Mean { .. }) => 1,
            CliError::Core(_) => 2,
            CliError::Acceptance(_) => 3,
            CliError::Io { .. } | CliError::Snapshot { .. } | CliError::Table { .. } | CliError::Plot(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
