use thiserror::Error;

/// Errors raised by circuit construction, synthesis and verification.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A gate refers to a missing or later gate, or a gate field is malformed.
    #[error("structural error: {0}")]
    Structural(String),

    /// An assignment or input does not fit the circuit.
    #[error("input error: {0}")]
    Input(String),

    /// Netlist or spec text could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A parameter violates the operation's precondition.
    #[error("parameter error: {0}")]
    Param(String),

    /// An operation was applied to a gate of the wrong kind.
    #[error("type error: {0}")]
    Type(String),

    /// The circuit does not have the shape an operation expects.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A construction would exceed its configured expansion cap.
    #[error("expansion cap exceeded: {what} needs more than {cap} terms")]
    CapExceeded { what: String, cap: usize },

    /// No discriminator plan separates the requested pair of weights.
    #[error("infeasible plan: {0}")]
    Infeasible(String),

    /// Exhaustive checking was requested beyond the configured input limit.
    #[error("size limit: {0}")]
    SizeLimit(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
