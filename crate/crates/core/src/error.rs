use std::path::PathBuf;

use crate::maskcore::Task;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        found: (u32, u32),
    },
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },
    #[error("raster data has {found} values, expected {expected}")]
    DataLength { expected: usize, found: usize },
    #[error("class {class} out of range for {task} (max {max})")]
    ClassOutOfRange { task: Task, class: u32, max: u32 },
    #[error("rle counts sum to {found}, expected {expected}")]
    CountsMismatch { expected: u64, found: u64 },
    #[error("rle has an interior zero run at index {index}")]
    NonCanonical { index: usize },
    #[error("taxonomy schema error: {0}")]
    Schema(String),
    #[error("confusion matrix shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("no class has a positive union")]
    AllUndefined,
    #[error("units span several classes ({first} and {second})")]
    MixedClasses { first: u16, second: u16 },
    #[error("no ground truth units")]
    NoGroundTruth,
    #[error("neither person has any foreground part")]
    BothEmpty,
    #[error("{0} is not a characteristic task")]
    NotACharacteristicTask(Task),
    #[error("unit is missing a score")]
    MissingScore,
    #[error("scene spec infeasible: {0}")]
    SpecInfeasible(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no prediction for image {0}")]
    MissingPrediction(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: png decode failed: {source}")]
    PngDecode {
        path: PathBuf,
        source: png::DecodingError,
    },
    #[error("{path}: png encode failed: {source}")]
    PngEncode {
        path: PathBuf,
        source: png::EncodingError,
    },
    #[error("{path}: unsupported raster format: {detail}")]
    RasterFormat { path: PathBuf, detail: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the caller's inputs rather than by the engine.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::ShapeMismatch(_)
                | Error::MixedClasses { .. }
                | Error::NoGroundTruth
                | Error::BothEmpty
                | Error::AllUndefined
                | Error::MissingScore
        )
    }
}
