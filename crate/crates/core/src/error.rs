use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by loading, refining and auditing graph datasets.
#[derive(Debug, Error)]
pub enum AuditError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} exceeds cap: {actual} > {limit}")]
    ResourceCap {
        what: &'static str,
        limit: usize,
        actual: usize,
    },

    #[error("dataset has no instance labels")]
    MissingLabels,

    #[error("dataset has no group column")]
    MissingGroups,

    #[error("unknown graph id {0}")]
    UnknownGraph(usize),

    #[error("iteration {requested} not recorded (history holds 0..={available})")]
    UnknownIteration { requested: usize, available: usize },

    #[error("embedding table is missing {} instance(s): {}", .0.len(), preview(.0))]
    MissingEmbeddings(Vec<usize>),

    #[error("insufficient pairs: {0}")]
    InsufficientPairs(String),
}

fn preview(ids: &[usize]) -> String {
    let shown: Vec<String> = ids.iter().take(10).map(|i| i.to_string()).collect();
    if ids.len() > 10 {
        format!("{} ...", shown.join(", "))
    } else {
        shown.join(", ")
    }
}

/// Coarse error category, used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Resource,
}

impl AuditError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            AuditError::InvalidArgument(_) => ErrorKind::Usage,
            AuditError::ResourceCap { .. } => ErrorKind::Resource,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AuditError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        AuditError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, AuditError>;
