use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Process exit codes used by the CLI. Usage errors exit with 2 (clap's
/// default).
pub mod exit {
    pub const OK: i32 = 0;
    pub const OUTPUT: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INPUT: i32 = 3;
    pub const INFEASIBLE: i32 = 4;
    pub const ANALYSIS: i32 = 5;
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("{context}: {message}")]
    Input { context: String, message: String },
    #[error("{run} run: every day of {first}..={last} failed to clear")]
    AllInfeasible { run: String, first: u32, last: u32 },
    #[error("{module}: {message}")]
    Analysis { module: &'static str, message: String },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Read { .. } | Error::Input { .. } => exit::INPUT,
            Error::AllInfeasible { .. } => exit::INFEASIBLE,
            Error::Analysis { .. } => exit::ANALYSIS,
            Error::Write { .. } => exit::OUTPUT,
        }
    }

    pub fn input(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Input { context: context.into(), message: message.to_string() }
    }

    pub fn analysis(module: &'static str, message: impl ToString) -> Self {
        Error::Analysis { module, message: message.to_string() }
    }

    pub(crate) fn read(path: &Path, source: io::Error) -> Self {
        Error::Read { path: path.to_path_buf(), source }
    }

    pub(crate) fn write(path: &Path, source: io::Error) -> Self {
        Error::Write { path: path.to_path_buf(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::read(path, e))
}
