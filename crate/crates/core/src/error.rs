use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },

    #[error("sentence has no tokens")]
    EmptySentence,

    #[error("range error: {0}")]
    Range(String),

    #[error("no legal split at source boundary {0}")]
    IllegalSplit(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty member set")]
    EmptyCluster,

    #[error("unsupported model format version {found} (expected {expected})")]
    Version { found: String, expected: u32 },

    #[error("model schema violation: {0}")]
    Schema(String),

    #[error("lexicon fingerprint mismatch for {which}: model was learned with {expected}, got {found}")]
    LexiconMismatch {
        which: &'static str,
        expected: String,
        found: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
