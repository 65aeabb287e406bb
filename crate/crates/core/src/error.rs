use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("load error: {0}")]
    Load(String),

    #[error("parse error in {context} at record {record}: {message}")]
    Parse {
        context: String,
        record: usize,
        message: String,
    },

    #[error("invalid nucleotide {found:?} at position {position}")]
    InvalidNucleotide { position: usize, found: char },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("word not in vocabulary: {0:?}")]
    OutOfVocabulary(String),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("non-finite loss in epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("model format error: {0}")]
    Format(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("stage {stage} failed (input digest {digest}): {source}")]
    Stage {
        stage: String,
        digest: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, record: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            record,
            message: message.into(),
        }
    }
}
