use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed {format} data: {reason}")]
    Malformed {
        format: &'static str,
        reason: String,
    },

    #[error("label {value} at ({x}, {y}) exceeds the maximum tooth label 32")]
    LabelOutOfRange { x: usize, y: usize, value: u32 },

    #[error("invalid dimensions {width}x{height}: {reason}")]
    InvalidDimensions {
        width: usize,
        height: usize,
        reason: String,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("patch size {patch_size} does not fit inside a {width}x{height} image")]
    PatchTooLarge {
        patch_size: usize,
        width: usize,
        height: usize,
    },

    #[error("overlap {overlap} must be smaller than the patch size {patch_size}")]
    InvalidOverlap { overlap: usize, patch_size: usize },

    #[error("pixel ({x}, {y}) is not covered by any patch")]
    CoverageGap { x: usize, y: usize },

    #[error("label {0} is not present in the map")]
    MissingLabel(u8),

    #[error("tooth label {0} is outside 1..=32")]
    InvalidToothLabel(u32),

    #[error("degenerate mask: {0}")]
    DegenerateMask(String),

    #[error("empty point set")]
    EmptyPoints,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
