use thiserror::Error;

/// Errors raised by graph, simulation, testing and search operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node index {index} out of range for graph with {count} nodes")]
    NodeOutOfRange { index: usize, count: usize },

    #[error("unknown node label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate node label `{0}`")]
    DuplicateLabel(String),

    #[error("self-loop on node `{0}`")]
    SelfLoop(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("d-separation requested on a cyclic graph")]
    CyclicGraph,

    #[error("node `{0}` is latent")]
    LatentNode(String),

    #[error("invalid SCC ordering: {0}")]
    InvalidOrder(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("fixed-point iteration did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("{0}")]
    Unsupported(String),

    #[error("sample of size {n} too small for conditioning set of size {cond}")]
    SampleTooSmall { n: usize, cond: usize },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("rank-deficient design matrix")]
    RankDeficient,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
