//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model or experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A list of every schema violation found while parsing a config.
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Schema(Vec<String>),

    /// Vector or grid sizes that do not fit together.
    #[error("shape mismatch: expected {expected}, got {got} ({what})")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The hypothesis of an inequality is not satisfied by the input.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// Energy or length outside the regime where a formula applies.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    /// A grid function that must be strictly positive is not.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// A combination the implementation deliberately does not handle.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The computation would be too large and was refused.
    #[error("refused: {0}")]
    Refused(String),

    /// The iterative eigensolver ran out of iterations.
    #[error("no convergence after {iterations} iterations (residuals {residuals:?})")]
    NotConverged {
        iterations: usize,
        residuals: Vec<f64>,
    },

    /// A counting request above the part of the spectrum that was computed.
    #[error("spectrum unresolved at E = {energy}: only {computed} eigenvalues known, largest {largest}")]
    Unresolved {
        energy: f64,
        computed: usize,
        largest: f64,
    },

    /// An error annotated with the module and operation that produced it.
    #[error("{module}::{operation}: {source}")]
    In {
        module: &'static str,
        operation: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach the originating module and operation.
    pub fn within(self, module: &'static str, operation: &'static str) -> Error {
        Error::In {
            module,
            operation,
            source: Box::new(self),
        }
    }
}

/// Extension to annotate any `Result` with its origin.
pub trait Context<T> {
    fn within(self, module: &'static str, operation: &'static str) -> Result<T>;
}

impl<T> Context<T> for Result<T> {
    fn within(self, module: &'static str, operation: &'static str) -> Result<T> {
        self.map_err(|e| e.within(module, operation))
    }
}
