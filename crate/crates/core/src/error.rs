use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in '{array}': expected {expected}, got {actual}")]
    DimensionMismatch {
        array: String,
        expected: String,
        actual: String,
    },

    #[error("validation failed for '{array}': {message}")]
    Validation { array: String, message: String },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("array '{0}' is already registered")]
    DuplicateArray(String),

    #[error("unresolved dimension '{0}'")]
    UnresolvedDimension(String),

    #[error("budget of {budget} bytes is infeasible; at least {minimum} bytes are required")]
    Infeasible { budget: u64, minimum: u64 },

    #[error("binding '{0}' does not target an existing catalog field")]
    Binding(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("chunk {index}: {source}")]
    Chunk {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("array '{array}' ({path}): {source}")]
    ArrayIo {
        array: String,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Coarse error classes, used to pick CLI exit codes and FFI status codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidArgument,
    Data,
    Infeasible,
    Io,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn mismatch(
        array: impl Into<String>,
        expected: impl ToString,
        actual: impl ToString,
    ) -> Self {
        Error::DimensionMismatch {
            array: array.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn validation(array: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            array: array.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) | Error::Unsupported(_) => ErrorKind::InvalidArgument,
            Error::Infeasible { .. } => ErrorKind::Infeasible,
            Error::Io { .. } => ErrorKind::Io,
            Error::Chunk { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

    /// Short machine-readable tag for the error variant.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Validation { .. } => "validation",
            Error::NonFinite { .. } => "non_finite",
            Error::DuplicateArray(_) => "duplicate_array",
            Error::UnresolvedDimension(_) => "unresolved_dimension",
            Error::Infeasible { .. } => "infeasible",
            Error::Binding(_) => "binding",
            Error::Unsupported(_) => "unsupported",
            Error::Chunk { .. } => "chunk",
            Error::Io { .. } | Error::ArrayIo { .. } => "io",
            Error::Json { .. } => "json",
            Error::Csv(_) => "csv",
        }
    }
}
