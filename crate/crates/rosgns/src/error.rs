use std::path::PathBuf;

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate corpus: no co-occurrence pairs (|D| = 0)")]
    DegenerateCorpus,

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("word {query:?} is not in the vocabulary (closest matches: {})", .suggestions.join(", "))]
    WordNotFound {
        query: String,
        suggestions: Vec<String>,
    },

    #[error("Spearman correlation undefined: {reason} ({pairs_used}/{pairs_total} pairs usable)")]
    UndefinedCorrelation {
        reason: String,
        pairs_used: usize,
        pairs_total: usize,
    },

    #[error("objective became non-finite at iteration {iteration}")]
    NumericalAbort { iteration: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
