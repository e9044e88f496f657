use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("mask has no lane pixels")]
    EmptyMask,

    #[error("no frames")]
    EmptySequence,

    #[error("expected a {expected} series, got {found}")]
    StageMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("series has no valid samples")]
    NoValidSamples,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("frame mismatch: {0}")]
    FrameMismatch(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error("frame {frame_index}: {source}")]
    AtFrame {
        frame_index: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_frame(self, frame_index: u64) -> Self {
        Error::AtFrame {
            frame_index,
            source: Box::new(self),
        }
    }
}
