use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("bad value {value:?} at row {row}, column `{column}`")]
    BadValue {
        row: usize,
        column: String,
        value: String,
    },

    #[error("course record references unknown student `{0}`")]
    OrphanCourseRecord(String),

    #[error("cohort split leaves the {0} side empty")]
    EmptySplit(&'static str),

    #[error("infeasible population profile: {0}")]
    InfeasibleProfile(String),

    #[error("labels contain a single class")]
    SingleClass,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("schema mismatch: expected {expected} columns, found {found}")]
    SchemaMismatch { expected: usize, found: usize },

    #[error("prediction sets cover different rows")]
    RowMismatch,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("pooled proportion is degenerate ({0})")]
    DegenerateCounts(f64),

    #[error("protected group `{0}` is empty")]
    EmptyGroup(String),

    #[error("sample has fewer than two values or zero variance")]
    DegenerateVariance,

    #[error("invalid likelihoods: model {model_ll}, null {null_ll}")]
    InvalidLikelihoods { model_ll: f64, null_ll: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with the pipeline stage it came from.
    pub fn at_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by the configuration rather than the data or pipeline.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) => true,
            Error::Stage { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
