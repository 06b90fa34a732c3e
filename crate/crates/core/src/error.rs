use std::path::Path;

/// Error type shared by every module in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller violated a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An operation needs more input than it was given (e.g. a fit over
    /// fewer points than parameters).
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A query outside the walked or sieved region.
    #[error("range error: {0}")]
    Range(String),

    /// Data violated an invariant that the construction guarantees; this
    /// indicates a bug or corrupted input, never a user mistake.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    /// A checkpoint written under a different format version or plan.
    #[error("incompatible checkpoint: {0}")]
    IncompatibleCheckpoint(String),

    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("i/o error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
