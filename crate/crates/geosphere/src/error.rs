use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] geosphere_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// Malformed binary or text input; `offset` is the byte (or line) position where
    /// decoding failed.
    #[error("{what} at {unit} {offset}: {message}")]
    Format {
        what: &'static str,
        unit: &'static str,
        offset: u64,
        message: String,
    },

    #[error("png decode: {0}")]
    PngDecode(#[from] png::DecodingError),

    #[error("png encode: {0}")]
    PngEncode(#[from] png::EncodingError),

    /// Invalid flag values; reported with exit status 2.
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_byte(what: &'static str, offset: u64, message: impl Into<String>) -> Self {
        Error::Format {
            what,
            unit: "byte",
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn at_line(what: &'static str, line: u64, message: impl Into<String>) -> Self {
        Error::Format {
            what,
            unit: "line",
            offset: line,
            message: message.into(),
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            _ => 1,
        }
    }
}
