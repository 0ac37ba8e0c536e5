use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed graph: {0}")]
    MalformedGraph(String),

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("unknown edge `{0}`")]
    UnknownEdge(String),

    #[error("graph has sinks ({0}); the operation requires a sink-free graph")]
    HasSinks(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("dimension mismatch in {0}")]
    DimensionMismatch(String),

    #[error("matrix entry is not a nonnegative integer: {0}")]
    BadMatrixEntry(String),

    #[error("factorization identity failed: {0}")]
    FactorizationFailed(String),

    #[error("search space too large: estimated {estimate} candidates exceeds budget {budget}")]
    SearchSpaceTooLarge { estimate: String, budget: u64 },

    #[error("search budget of {budget} steps exhausted ({context})")]
    BudgetExhausted { budget: u64, context: String },

    #[error("isomorphism search cap exceeded: {vertices} vertices > {cap}")]
    IsoBoundExceeded { vertices: usize, cap: usize },

    #[error("certificate link {index}: {reason}")]
    CertificateLink { index: usize, reason: String },

    #[error("block map table: {0}")]
    BlockMapTable(String),

    #[error("internal consistency: {0}")]
    InternalConsistency(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
