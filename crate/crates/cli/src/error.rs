use std::path::PathBuf;

use thiserror::Error;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Parse = 2,
    Solver = 3,
    Validation = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// A scenario file that could not be turned into a valid scenario.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}:{line}: key `{key}`: {message}", path.display())]
pub struct ParseError {
    pub path: PathBuf,
    /// 1-based line of the offending key, or of its enclosing section.
    pub line: usize,
    /// Dotted key path, e.g. `horizon.duration`.
    pub key: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },
    #[error("solver: {0}")]
    Solver(#[from] dtamp::Error),
    #[error("no convergence after {iterations} iterations ({termination})")]
    NotConverged {
        iterations: usize,
        termination: &'static str,
    },
    #[error("jacobian check failed for {}", families.join(", "))]
    CheckFailed { families: Vec<String> },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Parse(_) | CliError::Io { .. } | CliError::Csv { .. } | CliError::UnknownPreset(_) => {
                ExitStatus::Parse
            }
            CliError::Solver(_) | CliError::NotConverged { .. } => ExitStatus::Solver,
            CliError::CheckFailed { .. } => ExitStatus::Validation,
        }
    }

    /// Stable identifier printed in diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Io { .. } => "io",
            CliError::Csv { .. } => "csv",
            CliError::Solver(_) => "solver",
            CliError::NotConverged { .. } => "not_converged",
            CliError::CheckFailed { .. } => "check_failed",
            CliError::UnknownPreset(_) => "unknown_preset",
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
