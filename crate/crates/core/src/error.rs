use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("invalid language code {0:?} (expected two lowercase ASCII letters)")]
    InvalidLanguage(String),

    #[error("unknown dimension {0:?}")]
    UnknownDimension(String),

    #[error("instance {instance_id} has {count} judgement(s), at least 2 are required")]
    TooFewJudgements { instance_id: String, count: usize },

    #[error("instance {0} has not been aggregated")]
    NotAggregated(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("feature file error at record {index}: {message}")]
    FeatureRecord { index: usize, message: String },

    #[error("feature file error: {0}")]
    FeatureFormat(String),

    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error("class {0} is absent from the training data")]
    MissingClass(String),

    #[error("training diverged: {0}")]
    NonFiniteLoss(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("CoNLL-U parse error at line {line}: {message}")]
    Conllu { line: usize, message: String },

    #[error("key mismatch: {0}")]
    KeyMismatch(String),

    #[error("subgroup {descriptor} has {total_verbs} verbs, below the minimum of {min_verbs}")]
    BelowMinVerbs {
        descriptor: String,
        total_verbs: usize,
        min_verbs: usize,
    },

    #[error("configuration is invalid:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("missing input from stage `{stage}`: {detail}")]
    MissingStage { stage: String, detail: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::MissingStage { .. } => 3,
            _ => 1,
        }
    }
}
