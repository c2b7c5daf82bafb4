use thiserror::Error;

use crate::freegroup::NielsenMove;

#[derive(Debug, Error)]
pub enum Error {
    #[error("generator index {generator} out of range for rank {rank}")]
    InvalidGenerator { generator: usize, rank: usize },

    #[error("rank must be at least 2, got {0}")]
    RankTooSmall(usize),

    #[error("rank {0} exceeds the supported maximum of 26")]
    RankTooLarge(usize),

    #[error("rank mismatch: expected {expected}, got {actual}")]
    RankMismatch { expected: usize, actual: usize },

    #[error("invalid character {0:?} in word")]
    InvalidCharacter(char),

    #[error("operation is undefined on the empty word")]
    EmptyWord,

    #[error("unknown feature map {0:?}")]
    UnknownFeatureMap(String),

    #[error("cannot parse pattern {0:?}")]
    InvalidPattern(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("training data is not linearly separable")]
    NonSeparable,

    #[error("no sample word is reduced by {0} alone")]
    EmptyPureSet(NielsenMove),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("class {0} has no training samples")]
    EmptyClass(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed data: {0}")]
    Data(String),

    #[error("unsupported model schema version {0}")]
    SchemaVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
