use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("value {value} out of domain at row {row}, column {column} ({name})")]
    Domain {
        row: usize,
        column: usize,
        name: String,
        value: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("partition {0} has no rows")]
    EmptyPartition(String),

    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),

    #[error("need at least 2 features, got {0}")]
    TooFewFeatures(usize),

    #[error("node {0} is not covered by the community assignment")]
    UncoveredNode(String),

    #[error("graph is not connected; spanning tree covers {reached} of {total} nodes")]
    Disconnected { reached: usize, total: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("tree node {0} has no community")]
    MissingCommunity(String),

    #[error("degree distribution needs at least 2 distinct degrees, got {0}")]
    DegenerateDistribution(usize),

    #[error("only {available} nonzero eigenvalues, {requested} components requested")]
    RankDeficient { requested: usize, available: usize },

    #[error("training labels contain a single class")]
    DegenerateLabels,

    #[error("unknown feature {0}")]
    UnknownFeature(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the input data rather than by the caller.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::InvalidArgument(_))
    }
}
