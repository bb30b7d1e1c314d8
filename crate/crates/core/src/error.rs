use thiserror::Error;

/// Errors raised by instance handling, the algorithms and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("element {element} is contained in no set")]
    Uncoverable { element: usize },

    #[error("row {row} has no nonzero coefficient")]
    EmptyRow { row: usize },

    #[error("reference has weight on index {index} where the state has none (infinite divergence)")]
    InfiniteDivergence { index: usize },

    #[error("weight vector has zero cost; cannot normalize")]
    DegenerateState,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no set or column has cost <= budget {beta}; raise the budget")]
    InfeasibleBudget { beta: f64 },

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("weights must be nonnegative and not all zero")]
    ZeroWeights,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{what} of size {size} exceeds the cap {cap}")]
    CapExceeded { what: &'static str, size: u128, cap: u128 },

    #[error("no {k}-tuple of sets covers the elements seen so far; k is too small")]
    InfeasibleK { k: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported format version: {0}")]
    UnsupportedVersion(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("OPT oracle unavailable: {0}")]
    OracleUnavailable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
