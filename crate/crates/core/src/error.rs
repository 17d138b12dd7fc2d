use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no term survived tokenization and the min_df={min_df} cutoff")]
    EmptyVocabulary { min_df: usize },

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("exact posterior needs {topics}^{tokens} configurations, above the 2^18 limit")]
    InstanceTooLarge { topics: usize, tokens: usize },

    #[error("document has no tokens")]
    EmptyDocument,

    #[error("topic set for the paper side is empty")]
    EmptyTopicsP,

    #[error("followee {0} has tweet_count 0")]
    InvalidProfile(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("objective became non-finite at iteration {iteration}; lower the learning rate")]
    Divergence { iteration: usize },

    #[error("p(+|t,u) undefined: both joint probabilities are zero")]
    UndefinedConditional,

    #[error("app {0} has no followers")]
    EmptyFollowerSet(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("block {0} has zero variance in app counts")]
    ZeroVariance(String),

    #[error("unknown location block {0}")]
    UnknownBlock(String),

    #[error("region contains no blocks")]
    EmptyRegion,

    #[error("no documents survived filtering")]
    NoDocuments,

    #[error("no dated documents in year range {0}..={1}")]
    NoDocumentsInRange(i32, i32),

    #[error("model file format {found} is not supported (expected {expected})")]
    FormatVersionMismatch { found: u32, expected: u32 },

    #[error("corrupt count matrices: {0}")]
    CorruptCounts(String),

    #[error("{path}: {source}")]
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

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 config, 3 data, 4 numeric divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::FormatVersionMismatch { .. } => 2,
            Error::Divergence { .. } => 4,
            _ => 3,
        }
    }
}
