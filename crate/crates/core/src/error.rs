//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Broad failure category, used by callers (e.g. the CLI) to map errors
/// onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad configuration, ontology, or prompt template.
    Validation,
    /// Bad or inconsistent input data.
    Data,
    /// Network-level failure talking to the model endpoint.
    Transport,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    OntologyParse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid ontology: {0}")]
    InvalidOntology(String),

    #[error("invalid prompt template: {0}")]
    Template(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {count} invalid line(s): {detail}", path.display())]
    InvalidLines {
        path: PathBuf,
        count: usize,
        detail: String,
    },

    #[error("duplicate image id `{0}`")]
    DuplicateImage(String),

    #[error("unknown {context} id `{id}`")]
    UnknownId { id: String, context: String },

    #[error("world image `{0}` has no source label")]
    MissingLabel(String),

    #[error("{0}")]
    InvalidInput(String),

    #[error("transport error for {url}: {message}")]
    Transport { url: String, message: String },

    #[error("endpoint returned HTTP {status}: {body}")]
    Endpoint { status: u16, body: String },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::OntologyParse { .. }
            | Error::InvalidOntology(_)
            | Error::Template(_)
            | Error::Config(_) => ErrorClass::Validation,
            Error::Transport { .. } | Error::Endpoint { .. } | Error::Protocol(_) => {
                ErrorClass::Transport
            }
            _ => ErrorClass::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
