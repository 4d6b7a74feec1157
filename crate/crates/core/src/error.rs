use thiserror::Error;

/// Errors produced by the denoising toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("graph must have at least one vertex")]
    EmptyGraph,

    #[error("edge {index} ({u}, {v}) references a vertex outside 0..{n}")]
    VertexOutOfRange { index: usize, u: usize, v: usize, n: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("graph is disconnected: vertices {0} and {1} lie in different components")]
    Disconnected(usize, usize),

    #[error("graph is not a chain")]
    NotAChain,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("label {label} outside grid range [{lo}, {hi}]")]
    LabelOutOfRange { label: i64, lo: i64, hi: i64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("size guard exceeded: {0}")]
    TooLarge(String),

    #[error("weighting cannot be rescaled: edge {0} has zero weight but positive reference weight")]
    NotScalable(usize),

    #[error("invalid flow network: {0}")]
    Network(String),

    #[error("unknown method: {0}")]
    UnknownMethod(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
