use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// [`Error::name`] gives the stable short name of the failure kind, which is
/// what scripting front ends and the CLI report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("composition needs at least 2 parts, got {0}")]
    DimensionTooSmall(usize),
    #[error("dimension mismatch: {left} vs {right} parts")]
    DimensionMismatch { left: usize, right: usize },
    #[error("every entry is zero")]
    AllZero,
    #[error("row {row}: every entry is zero")]
    AllZeroRow { row: usize },
    #[error("negative entry {value} at part {index}")]
    NegativeEntry { index: usize, value: f64 },
    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },
    #[error("parts sum to {sum}, not 1")]
    NotOnSimplex { sum: f64 },
    #[error("part {index} is zero; log-ratio geometry needs strictly positive parts")]
    ZeroPart { index: usize },
    #[error("mixing weight {0} outside [0, 1]")]
    LambdaOutOfRange(f64),
    #[error("mask keeps no nonzero part")]
    EmptySubcomposition,
    #[error("library size must be at least 1")]
    InvalidLibrarySize,
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("class {class:?} has {count} sample(s); at least 2 are needed to split")]
    ClassTooSmall { class: String, count: usize },
    #[error("training labels contain a single class")]
    SingleClassTrain,
    #[error("scores contain a single class")]
    SingleClass,
    #[error("input is empty")]
    EmptyInput,
    #[error("batch has no views")]
    DegenerateBatch,
    #[error("non-finite loss or parameter at epoch {epoch}")]
    TrainingDiverged { epoch: usize },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: u64, column: usize, message: String },
    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow { line: u64, expected: usize, found: usize },
    #[error("row {row}, column {column:?}: {value:?} is not a number")]
    NonNumericFeature { row: usize, column: String, value: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable short name of the failure kind.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionTooSmall(_) => "DimensionTooSmall",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::AllZero | Error::AllZeroRow { .. } => "AllZero",
            Error::NegativeEntry { .. } => "NegativeEntry",
            Error::NonFinite { .. } | Error::TrainingDiverged { .. } => "NonFinite",
            Error::NotOnSimplex { .. } => "NotOnSimplex",
            Error::ZeroPart { .. } => "ZeroPart",
            Error::LambdaOutOfRange(_) => "LambdaOutOfRange",
            Error::EmptySubcomposition => "EmptySubcomposition",
            Error::InvalidLibrarySize => "InvalidLibrarySize",
            Error::EmptyTrainingSet => "EmptyTrainingSet",
            Error::EmptyDataset => "EmptyDataset",
            Error::ClassTooSmall { .. } => "ClassTooSmall",
            Error::SingleClassTrain => "SingleClassTrain",
            Error::SingleClass => "SingleClass",
            Error::EmptyInput => "EmptyInput",
            Error::DegenerateBatch => "DegenerateBatch",
            Error::Parse { .. } => "ParseError",
            Error::MissingLabelColumn(_) => "MissingLabelColumn",
            Error::RaggedRow { .. } => "RaggedRow",
            Error::NonNumericFeature { .. } => "NonNumericFeature",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Checkpoint { .. } => "CheckpointFormat",
            Error::Io { .. } => "IoError",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
