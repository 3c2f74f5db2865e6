use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Pipeline stage at which a scorer failure happened during re-ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    SourceScoring,
    CandidateScoring,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::SourceScoring => f.write_str("source-scoring"),
            Stage::CandidateScoring => f.write_str("candidate-scoring"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),

    #[error("unsupported language `{0}`")]
    UnsupportedLanguage(String),

    #[error("no score for text `{0}`")]
    MissingScore(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("backend returned no candidates for source {0}")]
    EmptyResult(u64),

    #[error("data mismatch: {0}")]
    DataMismatch(String),

    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("{stage} failed: {source}")]
    Scoring {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("batch item {index}: {source}")]
    Batch {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    /// Stable, machine-readable class name for the error.
    pub fn class(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::BackendUnavailable(_) => "backend-unavailable",
            Error::UnsupportedLanguage(_) => "unsupported-language",
            Error::MissingScore(_) => "missing-score",
            Error::Parse { .. } => "parse-error",
            Error::Validation(_) => "validation-error",
            Error::EmptyResult(_) => "empty-result",
            Error::DataMismatch(_) => "data-mismatch",
            Error::UndefinedStatistic(_) => "undefined-statistic",
            Error::Protocol(_) => "protocol-error",
            Error::Scoring { source, .. } | Error::Batch { source, .. } => source.class(),
            Error::Io(_) => "io-error",
            Error::Json(_) => "parse-error",
        }
    }
}
