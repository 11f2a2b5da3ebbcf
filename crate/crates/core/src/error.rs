use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Signed tropical addition of a positive and a negative number.
    #[error("signed tropical addition of opposite signs is undefined")]
    MixedSigns,

    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The absorbing-chain system has no unique solution; some Random vertex
    /// cannot escape to a Min or Max vertex.
    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("matrices are not row-stochastic: {0}")]
    NonStochastic(String),

    #[error("graph failed validation: {0}")]
    ValidationFailed(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("graph is not compliant for synthesis: {0}")]
    NotCompliant(String),

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    /// A pencil entry carries both signs for the same variable, or a positive
    /// off-diagonal coefficient.
    #[error("invalid pencil: {0}")]
    InvalidPencil(String),

    #[error("no point of the union lies below the query point")]
    EmptyBelow,

    #[error("parse error: {0}")]
    Parse(String),
}
