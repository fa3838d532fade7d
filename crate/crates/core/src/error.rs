use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("generators span a subgroup of rank {rank} < {dim} (infinite index)")]
    RankDeficient { dim: usize, rank: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("residue lattice is not contained in the target lattice")]
    NotComparable,

    #[error("index {index} is too large for dense residue tables (limit {limit})")]
    IndexTooLarge { index: String, limit: usize },

    #[error("descendant set of size {size} exceeds cap {cap}; use histogram mode")]
    CapExceeded { size: String, cap: usize },

    #[error("level {level} is not available (spec depth {depth}, no extension rule)")]
    LevelUnavailable { level: usize, depth: usize },

    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    BadEpsilon(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("unknown gallery case {0:?}")]
    UnknownCase(String),

    #[error("chain is not decreasing at position {0}")]
    NotDecreasing(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
