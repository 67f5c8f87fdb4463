use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A file did not parse under its declared format.
    #[error("format error in {path} at byte {offset}: {reason}")]
    Format { path: PathBuf, offset: u64, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error on {path}: {reason}")]
    Codec { path: PathBuf, reason: String },

    /// A value violates a type invariant (negative pixel, label out of range, ...).
    #[error("invalid data: {0}")]
    Invalid(String),

    #[error("dimension mismatch: {0}")]
    Dimensions(String),

    /// A caller-side precondition failed.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The scene cannot be processed meaningfully (e.g. the inpaint mask covers almost everything).
    #[error("degenerate scene: {0}")]
    Degenerate(String),

    /// An internal consistency check failed.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("json error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
