use thiserror::Error;

use crate::data::Action;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad configuration: unknown feature, invalid learner parameters, etc.
    #[error("configuration error: {0}")]
    Config(String),
    /// Malformed or inconsistent data.
    #[error("data error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Data { line: Option<u64>, msg: String },
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("insufficient data at stage {stage}: {detail}")]
    InsufficientData { stage: usize, detail: String },
    #[error("insufficient data at stage {stage}: fewer than 2 live units received action {action}")]
    InsufficientActionData { stage: usize, action: Action },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data { line: None, msg: msg.into() }
    }

    pub(crate) fn data_at(line: u64, msg: impl Into<String>) -> Self {
        Error::Data { line: Some(line), msg: msg.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
