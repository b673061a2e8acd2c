use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("letter index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },

    #[error("alphabet mismatch: expected rank {expected}, found rank {found}")]
    AlphabetMismatch { expected: usize, found: usize },

    #[error("expected {expected} images, found {found}")]
    ImageCount { expected: usize, found: usize },

    #[error("{side} composite does not fix letter {letter}")]
    CompositeNotIdentity { side: &'static str, letter: char },

    #[error("rank must be at least {min}, got {rank}")]
    RankTooSmall { rank: usize, min: usize },

    #[error("generator list is empty")]
    EmptyGenerators,

    #[error("invalid budget {0}")]
    InvalidBudget(usize),

    #[error("matrix is not invertible over Z (det = {det})")]
    NotInvertible { det: i128 },

    #[error("matrix dimensions do not agree")]
    DimensionMismatch,

    #[error("integer overflow in matrix arithmetic")]
    Overflow,

    #[error("outside desk scale: {0}")]
    DeskScale(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph has {edges} edges, cap is {cap}")]
    SizeCap { edges: usize, cap: usize },

    #[error("graph automorphism lemma violated: {0}")]
    TheoremViolation(String),

    #[error("edge path is not concatenable at position {0}")]
    NotConcatenable(usize),

    #[error("edge image of edge {0} is not tight")]
    NotTight(usize),

    #[error("edge {0} has a degenerate (empty) image")]
    DegenerateImage(usize),

    #[error("invalid marking: {0}")]
    InvalidMarking(String),

    #[error("invalid graph map: {0}")]
    InvalidMap(String),

    #[error("subforest misses vertex {0}, which carries a nontrivial group")]
    SubforestMissesVertex(usize),

    #[error("invalid free factor witness: {0}")]
    InvalidWitness(String),

    #[error("cyclic-class partition verification failed: {0}")]
    VerificationFailed(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}
