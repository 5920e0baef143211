use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("empty observation window")]
    EmptyWindow,

    #[error("invalid probability {0}: must lie in [0, 1]")]
    InvalidProbability(f64),

    #[error("region {0} has expected posting rate 0; cannot normalize")]
    ZeroExpectedRate(String),

    #[error("cannot featurize an invalid day ({day} in {region})")]
    InvalidDay { day: chrono::NaiveDate, region: String },

    #[error("lagged window mismatch: {0}")]
    LaggedWindow(String),

    #[error("labels contain a single class; need both positives and negatives")]
    SingleClass,

    #[error("not enough rows: {0}")]
    NotEnoughRows(String),

    #[error("feature ordering digest mismatch: model {model}, runtime {runtime}")]
    DigestMismatch { model: String, runtime: String },

    #[error("unsupported model format tag {0:?}")]
    ModelFormat(String),

    #[error("invalid configuration at {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("pipeline stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
