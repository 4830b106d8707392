use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}", config_message(.line, .field, .message))]
    Config {
        line: Option<usize>,
        field: String,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] rabi_sense::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    /// A check run by `validate` did not pass.
    #[error("{0}")]
    Check(String),
}

fn config_message(line: &Option<usize>, field: &str, message: &str) -> String {
    match line {
        Some(l) => format!("config line {l}, field `{field}`: {message}"),
        None => format!("config field `{field}`: {message}"),
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(line: Option<usize>, field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 usage, 2 physics domain, 3 numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::Io { .. } => 1,
            CliError::Core(e) if e.is_physics_domain() => 2,
            CliError::Core(_) | CliError::Csv(_) | CliError::Check(_) => 3,
        }
    }
}
