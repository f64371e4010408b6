use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the enhancement library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("pixel domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("invalid clip bounds: lo {lo} > hi {hi}")]
    InvalidBounds { lo: f64, hi: f64 },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("unsupported channel count {0}, expected a single grayscale channel")]
    UnsupportedChannels(u8),

    #[error("unsupported pixel domain: {0}")]
    UnsupportedDomain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),

    #[error("manifest already contains split assignments (first: {0})")]
    AlreadySplit(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to decode {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("unsupported format for {path}: {message}")]
    UnsupportedFormat { path: PathBuf, message: String },

    #[error("failed to encode {path}: {message}")]
    Encode { path: PathBuf, message: String },

    #[error("worker pool: {0}")]
    WorkerPool(String),

    #[error("manifest error: {0}")]
    Manifest(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
