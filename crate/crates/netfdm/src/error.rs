use std::path::PathBuf;

/// Errors of the command-line layer: everything the core can report, plus
/// I/O and usage problems.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] netfdm_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 0 success, 2 parameter, 3 data/parse, 4 convergence/experiment.
    pub fn exit_code(&self) -> i32 {
        use netfdm_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Core(e) => match e {
                E::Parameter(_) | E::Shape(_) | E::Capability(_) => 2,
                E::Data(_) | E::Parse { .. } => 3,
                E::Convergence { .. } | E::Experiment(_) | E::BoundViolation(_) => 4,
            },
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
