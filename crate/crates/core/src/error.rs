use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(
        "line count mismatch: source has {source_lines} lines, reference has {reference_lines}"
    )]
    LineCountMismatch {
        source_lines: usize,
        reference_lines: usize,
    },

    #[error("{}: invalid UTF-8 on line {line}", path.display())]
    InvalidUtf8 { path: PathBuf, line: usize },

    #[error("invalid token {token:?}: tokens must be non-empty and contain no whitespace")]
    InvalidToken { token: String },

    #[error("M2 line {line}: {message}")]
    M2Syntax { line: usize, message: String },

    #[error("M2 entry {entry}: overlapping annotations for annotator {annotator}")]
    OverlappingAnnotations { entry: usize, annotator: u32 },

    #[error("edit script does not match source at position {position}: {message}")]
    ScriptMismatch { position: usize, message: String },

    #[error("label sequence has {found} slots, source has {expected} tokens")]
    LabelLengthMismatch { expected: usize, found: usize },

    #[error("sentinel slot may only hold $KEEP or $APPEND_<t>, found {label}")]
    InvalidSentinel { label: String },

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("chain endpoints do not match the instance: {0}")]
    ChainMismatch(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("corpus length mismatch: {what} has {found} sentences, expected {expected}")]
    CorpusLengthMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid metric input: {0}")]
    InvalidMetric(String),

    #[error("position {position}: {message}")]
    InvalidDistribution { position: usize, message: String },

    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
