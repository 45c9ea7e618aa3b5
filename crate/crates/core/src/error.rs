use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("n = {n} is incompatible with the mixture ratios (component {component} gets a fractional count)")]
    Incompatible { n: u64, component: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid component index {index} (mixture has {count} components)")]
    InvalidComponent { index: usize, count: usize },

    #[error("invalid mixture specification: {0}")]
    InvalidSpec(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("{what} did not converge (error estimate {error:.3e} above tolerance {tolerance:.3e})")]
    NonConvergence { what: &'static str, error: f64, tolerance: f64 },

    #[error("precondition `{condition}` failed (slack {slack:.6e})")]
    PreconditionFailed { condition: &'static str, slack: f64 },

    #[error("unsupported setting: {0}")]
    UnsupportedSetting(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("vertex set of size {n} exceeds the enumeration cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("vertex set does not induce a clique (missing edge {0}-{1})")]
    NotAClique(usize, usize),

    #[error("vertex index {index} out of range for a graph on {n} vertices")]
    VertexOutOfRange { index: usize, n: usize },

    #[error("missing bound for event ({0}, {1})")]
    MissingEvent(usize, usize),

    #[error("invariant violated: {0}")]
    InvariantViolated(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
