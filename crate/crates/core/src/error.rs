use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("invalid image dimensions {width}x{height}")]
    InvalidDims { width: f64, height: f64 },

    /// A normalized component fell outside `[0, 1]`.
    #[error("normalized {component} = {value} is outside [0, 1]")]
    Conversion { component: &'static str, value: f64 },

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("invalid class map: {0}")]
    ClassMap(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("missing detection files for images: {}", .0.join(", "))]
    MissingDetections(Vec<String>),

    #[error("no scorable classes (every class has zero ground-truth instances)")]
    NoScorableClasses,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid run records: {0}")]
    Records(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", .path.display())]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn parse(
        source_name: impl Into<String>,
        line: usize,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches a file name to a parse error produced from in-memory text.
    pub fn with_source_name(self, name: impl Into<String>) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                source_name: name.into(),
                line,
                message,
            },
            other => other,
        }
    }
}
