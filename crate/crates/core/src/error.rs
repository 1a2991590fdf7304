use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{source_name}: {msg}")]
    Parse { source_name: String, msg: String },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("no skeleton: {0}")]
    NoSkeleton(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("candidate set is empty; run the fallback before the degree filter")]
    EmptyCandidates,

    #[error("{what} too large: {size} exceeds the limit of {limit}")]
    GuardExceeded {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(source_name: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            msg: msg.into(),
        }
    }
}
