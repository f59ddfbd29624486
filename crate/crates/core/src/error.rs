use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse {what}: {source}")]
    Parse {
        what: &'static str,
        #[source]
        source: serde_json::Error,
    },

    /// A structural or physical invariant does not hold. `field` names the
    /// offending input field.
    #[error("invalid {field}: {message}")]
    Invariant { field: String, message: String },

    /// A numeric parameter lies outside the domain of an operation.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("arity mismatch: expected {expected} qubits, got {actual}")]
    Arity { expected: usize, actual: usize },

    #[error("no coupling between qubits {0} and {1}")]
    NotAnEdge(usize, usize),

    #[error("gate {gate} is not supported here")]
    UnsupportedGate { gate: String },

    #[error("{what} needs {qubits} qubits, the dense limit is {limit}")]
    SizeLimit {
        what: &'static str,
        qubits: usize,
        limit: usize,
    },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("decay fit failed: {message} (residual {residual:.3e})")]
    Fit { message: String, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invariant(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invariant {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(what: &'static str, source: serde_json::Error) -> Self {
        Error::Parse { what, source }
    }
}
