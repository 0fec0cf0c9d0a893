use thiserror::Error;

/// Node identifier within a template file.
pub type NodeId = u32;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("template validation failed at node {node_id}: {message}")]
    Template { node_id: NodeId, message: String },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("incompatible annotations: {0}")]
    IncompatibleAnnotations(String),

    #[error("undefined score: {0}")]
    UndefinedScore(String),

    #[error("undefined prediction: {0}")]
    UndefinedPrediction(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error in {path} at line {line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
