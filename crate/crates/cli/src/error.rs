use std::path::PathBuf;

use thiserror::Error;

/// CLI-level errors; each class carries a distinct exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error in [{section}]{}: {msg}", key_suffix(.key, .line))]
    Validation { section: String, key: Option<String>, line: Option<usize>, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("numerical error: {0}")]
    Numerical(riscalc_core::Error),
}

fn key_suffix(key: &Option<String>, line: &Option<usize>) -> String {
    match (key, line) {
        (Some(k), Some(l)) => format!(" key `{k}` (line {l})"),
        (Some(k), None) => format!(" key `{k}`"),
        (None, Some(l)) => format!(" (line {l})"),
        (None, None) => String::new(),
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => 2,
            CliError::Validation { .. } => 3,
            CliError::Io { .. } => 4,
            CliError::Numerical(_) => 5,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<riscalc_core::Error> for CliError {
    fn from(e: riscalc_core::Error) -> Self {
        match e {
            riscalc_core::Error::InvalidConfig(msg) => CliError::Validation {
                section: "scenario".into(),
                key: None,
                line: None,
                msg,
            },
            other => CliError::Numerical(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
