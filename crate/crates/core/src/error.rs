use std::path::PathBuf;

/// Errors produced by the reconstruction library and its IO layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The input carries no usable information for the requested update,
    /// e.g. an all-zero frame stack or a pure-transparency object.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dense operators need {entries} entries, above the limit of {limit}")]
    TooLarge { entries: usize, limit: usize },

    #[error("iteration {iter}: {source}")]
    AtIteration {
        iter: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("npy {path}: {msg}")]
    Npy { path: PathBuf, msg: String },

    #[error("csv {path}: {msg}")]
    Csv { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for [`Error::Degenerate`], looking through iteration wrappers.
    pub fn is_degenerate(&self) -> bool {
        match self {
            Error::Degenerate(_) => true,
            Error::AtIteration { source, .. } => source.is_degenerate(),
            _ => false,
        }
    }
}
