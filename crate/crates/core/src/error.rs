use thiserror::Error;

/// Errors produced while parsing or validating the combinatorial inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("zero weight is not allowed (token `{0}`)")]
    ZeroWeight(String),

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("weights do not sum to zero (sum = {0})")]
    NonzeroSum(String),

    #[error("passport needs at least one positive and one negative weight")]
    OneSided,

    #[error("passport must have at least two vertices")]
    TooSmall,

    #[error("label `{0}` does not belong to the passport")]
    UnknownLabel(String),

    #[error("operands belong to different passports")]
    PassportMismatch,

    #[error("permutation must list every label exactly once")]
    NotAPermutation,

    #[error("operation requires a tree permutation")]
    NotATreePermutation,

    #[error("graph is not connected")]
    Disconnected,

    #[error("marks must be two distinct vertices")]
    BadMarks,

    #[error("edge {0} joins two vertices of the same color")]
    SameColorEdge(usize),

    #[error("parallel edges between `{0}` and `{1}`")]
    ParallelEdges(String, String),

    #[error("graph contains a cycle")]
    CyclicGraph,

    #[error("vertex `{0}` has weight {1} but incident edges sum to {2}")]
    WeightMismatch(String, String, String),

    #[error("rotation at `{0}` does not list its incident edges exactly once")]
    RotationMismatch(String),

    #[error("edge weight must be positive (edge {0})")]
    NonpositiveEdgeWeight(usize),

    #[error("size guard: {0}! permutations exceed the default bound; raise --max-n to override")]
    SizeGuard(usize),

    #[error("exact division failed: {0} is not divisible by {1}")]
    Divisibility(String, String),

    #[error("invalid json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
