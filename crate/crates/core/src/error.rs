use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Problems found while parsing a lexicon file.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("empty lexicon")]
    Empty,
    #[error("line {line}: expected `phrase<TAB>category`, got {content:?}")]
    Parse { line: usize, content: String },
    #[error("line {line}: unknown category {category:?}")]
    UnknownCategory { line: usize, category: String },
    #[error("line {line}: duplicate phrase {phrase:?} (first seen on line {first})")]
    DuplicatePhrase {
        line: usize,
        phrase: String,
        first: usize,
    },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon {path}: {source}")]
    Lexicon {
        path: PathBuf,
        #[source]
        source: LexiconError,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("stream {comment_id} belongs to project {found:?}, expected {expected:?}")]
    ProjectMismatch {
        comment_id: String,
        expected: String,
        found: String,
    },
    #[error("corpus quality: {malformed} of {total} records malformed (limit 10%)")]
    CorpusQuality { malformed: usize, total: usize },
    #[error("network: {0}")]
    Network(String),
    #[error("project {project}: {source}")]
    InProject {
        project: String,
        #[source]
        source: Box<Error>,
    },
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the CLI: 1 usage, 2 corpus quality, 3 I/O, 4 network.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CorpusQuality { .. } => 2,
            Error::Io { .. } => 3,
            Error::Network(_) => 4,
            Error::InProject { source, .. } => source.exit_code(),
            Error::Lexicon { .. }
            | Error::Config(_)
            | Error::ProjectMismatch { .. }
            | Error::Invalid(_) => 1,
        }
    }
}
