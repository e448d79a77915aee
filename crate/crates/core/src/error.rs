use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image dimensions {width}x{height}")]
    Dimension { width: usize, height: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("cannot read image {path}: {source}")]
    ImageRead {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("cannot write image {path}: {source}")]
    ImageWrite {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed JSON; carries the parser's line/column diagnostics.
    #[error("{context}: schema error at line {line}, column {column}: {message}")]
    Schema {
        context: String,
        line: usize,
        column: usize,
        message: String,
    },

    /// Well-formed JSON whose content violates a domain invariant.
    #[error("{context}: record {index}: {message}")]
    Validation {
        context: String,
        index: usize,
        message: String,
    },

    #[error("tag orientation is ambiguous ({left} left, {right} right, {tied} on the midline)")]
    Orientation {
        left: usize,
        right: usize,
        tied: usize,
    },

    #[error(
        "tag cannot be classified: left probe {left} crossings, right probe {right} crossings"
    )]
    UnclassifiedTag { left: usize, right: usize },

    #[error("outlet {0} not found in forest")]
    OutletNotFound(usize),

    #[error("layout generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },

    #[error("dimension mismatch: image is {image:?}, result expects {result:?}")]
    DimensionMismatch {
        image: (usize, usize),
        result: (usize, usize),
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(context: impl Into<String>, err: &serde_json::Error) -> Self {
        Error::Schema {
            context: context.into(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
