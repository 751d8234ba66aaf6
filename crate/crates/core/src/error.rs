use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid architecture: input dim {input_dim}, representation dim {rep_dim} gives hidden width {hidden}")]
    InvalidArchitecture {
        input_dim: usize,
        rep_dim: usize,
        hidden: i64,
    },

    #[error("insufficient batch: need at least {needed} samples, have {available}")]
    InsufficientBatch { needed: usize, available: usize },

    #[error("unusable dataset: {0}")]
    UnusableDataset(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: {detail}")]
    TrainingDiverged {
        epoch: usize,
        batch: usize,
        detail: String,
    },

    #[error("non-finite gradient in parameter {parameter}[{index}]")]
    NonFiniteGradient { parameter: String, index: usize },

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("unknown ablation mode `{0}`")]
    UnknownMode(String),

    #[error("{}: row {row}, column `{column}`: {message}", path.display())]
    Load {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("corrupt model artifact: {0}")]
    CorruptArtifact(String),

    #[error("unsupported artifact version `{0}`")]
    UnsupportedVersion(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable identifier used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::Contract(_) => "contract_violation",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::InvalidArchitecture { .. } => "invalid_architecture",
            Error::InsufficientBatch { .. } => "insufficient_batch",
            Error::UnusableDataset(_) => "unusable_dataset",
            Error::TrainingDiverged { .. } => "training_diverged",
            Error::NonFiniteGradient { .. } => "training_diverged",
            Error::UndefinedMetric(_) => "undefined_metric",
            Error::UnknownMode(_) => "unknown_mode",
            Error::Load { .. } => "load_error",
            Error::CorruptArtifact(_) => "corrupt_artifact",
            Error::UnsupportedVersion(_) => "unsupported_version",
            Error::Config(_) => "config_error",
            Error::Csv(_) => "csv_error",
            Error::Json(_) => "json_error",
            Error::Io(_) => "io_error",
        }
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            context,
            expected,
            found,
        })
    }
}
