use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pore pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header at byte {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: String },

    #[error("unsupported bit depth (maxval {maxval}) at byte {offset}; only maxval 255 is supported")]
    UnsupportedDepth { offset: usize, maxval: u32 },

    #[error("truncated payload at byte {offset}: expected {expected} bytes, found {found}")]
    Truncated {
        offset: usize,
        expected: usize,
        found: usize,
    },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("{0}")]
    Domain(String),

    #[error("insufficient correspondences: need at least {needed}, got {got}")]
    InsufficientPairs { needed: usize, got: usize },

    #[error("all consensus samples were degenerate")]
    DegenerateSamples,

    #[error("fitted scale {scale} outside accepted range [{min}, {max}]")]
    ScaleRejected { scale: f64, min: f64, max: f64 },

    #[error("resolution mismatch: {left} ppi vs {right} ppi")]
    PpiMismatch { left: u32, right: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            line,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
