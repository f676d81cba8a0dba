use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("signal too short: {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("signal contains non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("insufficient extrema: {0} found, need at least 2")]
    InsufficientExtrema(usize),

    #[error("transition longer than channel: D={d}, M={m}")]
    TransitionTooLong { d: usize, m: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("SNR undefined: {0}")]
    SnrUndefined(&'static str),

    #[error("aliasing: sampling rate {fs} Hz must exceed twice the highest frequency {max_freq} Hz")]
    Aliasing { fs: f64, max_freq: f64 },

    #[error("parse error in {context} at {position}: {message}")]
    Parse {
        context: String,
        position: String,
        message: String,
    },

    #[error("dataset not found: {}", .0.display())]
    DatasetNotFound(PathBuf),

    #[error("unbalanced dataset: {0}")]
    Unbalanced(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("{context}: {source}")]
    Task {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(
        context: impl Into<String>,
        position: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            context: context.into(),
            position: position.into(),
            message: message.into(),
        }
    }
}
