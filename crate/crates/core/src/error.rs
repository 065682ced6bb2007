use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation was called outside its domain (empty merge, zero-area IoU, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A malformed annotation or image file.
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    /// A detection stream line that violates the wire schema.
    #[error("detection stream line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("unknown class `{0}`")]
    UnknownClass(String),

    #[error("duplicate image id `{0}`")]
    DuplicateImageId(String),

    #[error("image ids differ between predictions and ground truth: missing from predictions [{}], missing from ground truth [{}]", missing_from_pred.join(", "), missing_from_gt.join(", "))]
    IdMismatch {
        missing_from_pred: Vec<String>,
        missing_from_gt: Vec<String>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Parse { .. } => "parse",
            Error::Schema { .. } => "schema",
            Error::UnknownClass(_) => "unknown_class",
            Error::DuplicateImageId(_) => "duplicate_image_id",
            Error::IdMismatch { .. } => "id_mismatch",
            Error::Io { .. } => "io",
        }
    }
}
