use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid generator {index}: {reason}")]
    InvalidGenerator { index: usize, reason: String },

    #[error("invalid word: letter {letter} but only {generators} generators")]
    InvalidWord { letter: usize, generators: usize },

    #[error("point index {index} out of range for a space of {size} points")]
    InvalidPoint { index: usize, size: usize },

    #[error("operation requires a {0} system")]
    UnsupportedKind(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("semigroup table is not associative: ({x}*{y})*{z} != {x}*({y}*{z})")]
    NonAssociative { x: usize, y: usize, z: usize },

    #[error("point is not in the simplex: {0}")]
    Containment(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}
