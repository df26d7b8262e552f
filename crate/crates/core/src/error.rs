//! Error types shared across the pipeline.

use thiserror::Error;

/// Everything that can go wrong between raw trajectory logs and a routed
/// prediction.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("dataset contains no valid records")]
    EmptyDataset,

    #[error("invalid window parameters: {0}")]
    InvalidWindowParams(String),

    #[error("segment too short: need at least {needed} observed points, got {got}")]
    DegenerateSegment { needed: usize, got: usize },

    #[error("too few samples: {rows} rows for k={k}")]
    TooFewSamples { rows: usize, k: usize },

    #[error("retrieval bank is empty or has no compatible entries")]
    EmptyBank,

    #[error("holdout split contains no segments")]
    EmptyHoldout,

    #[error("evidence table has no populated cells")]
    NoEvidence,

    #[error("expert name already registered: {0}")]
    DuplicateExpertName(String),

    #[error("all ensemble weights are zero")]
    AllZeroWeights,

    #[error("unknown ablation variant: {0}")]
    UnknownVariant(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("artifact version mismatch: {0}")]
    VersionMismatch(String),

    #[error("malformed artifact {kind}: {reason}")]
    Artifact { kind: String, reason: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
