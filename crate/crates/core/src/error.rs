use thiserror::Error;

use crate::graph::Topology;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// The graph description violates one of its construction invariants.
    #[error("invalid graph: {0}")]
    InvalidSpec(String),

    #[error("operation `{op}` does not support topology {topology:?}")]
    UnsupportedTopology { op: &'static str, topology: Topology },

    /// An argument lies outside the domain of a function (e.g. `kL <= 0`).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Root search could not produce the requested number of levels.
    #[error("solver failure: {message}; scan trace: {trace:?}")]
    SolverFailure { message: String, trace: Vec<String> },

    /// Two levels closer than the resolvable separation, or a multi-dimensional null space.
    #[error("degenerate spectrum near kL = {x}: {detail}")]
    Degenerate { x: f64, detail: String },

    #[error("inconsistent eigenstate at kL = {x}: boundary residual {residual:e}")]
    InconsistentState { x: f64, residual: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("need at least {needed} states, got {got}")]
    InsufficientBasis { needed: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "invalid_spec",
            Error::UnsupportedTopology { .. } => "unsupported_topology",
            Error::Domain(_) => "domain",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::SolverFailure { .. } => "solver_failure",
            Error::Degenerate { .. } => "degenerate",
            Error::InconsistentState { .. } => "inconsistent_state",
            Error::Quadrature(_) => "quadrature",
            Error::InsufficientBasis { .. } => "insufficient_basis",
            Error::Config(_) => "config",
        }
    }

    /// True for errors raised while validating inputs rather than while solving.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec(_)
                | Error::UnsupportedTopology { .. }
                | Error::Domain(_)
                | Error::InvalidArgument(_)
                | Error::Config(_)
        )
    }
}
