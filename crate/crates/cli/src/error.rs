use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("config is missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {msg}")]
    Value { key: String, msg: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] supratoa_core::Error),
}

pub fn core<E: Into<supratoa_core::Error>>(e: E) -> CliError {
    CliError::Core(e.into())
}
