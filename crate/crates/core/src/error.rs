use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node index {0}")]
    UnknownNode(usize),

    #[error("unknown node label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate node label `{0}`")]
    DuplicateLabel(String),

    #[error("self-loop on node `{0}`")]
    SelfLoop(String),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(String, String),

    #[error("{origin}: {location}: {message}")]
    Parse {
        origin: String,
        location: String,
        message: String,
    },

    #[error("graph universe does not match the model universe")]
    UniverseMismatch,

    #[error("sequence is empty")]
    EmptySequence,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("posterior mode undefined: {0}")]
    UndefinedMode(String),

    #[error("insufficient training variance for statistic {0}")]
    ZeroVariance(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(
        origin: impl Into<String>,
        location: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            origin: origin.into(),
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }
}
