use thiserror::Error;

use crate::calculus::{EdgeDensity, VertexFunction};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input: bad vertex id, violated precondition, malformed set.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed input at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The Dirichlet solver ran out of local updates before reaching the
    /// residual target. Carries the best iterate.
    #[error("solver did not converge: residual {residual:e} after {iterations} local updates")]
    Convergence {
        residual: f64,
        iterations: usize,
        best: Box<VertexFunction>,
    },

    /// The modulus solver could not close its duality gap.
    #[error("modulus solver did not converge: relative dual gap {gap:e}")]
    ModulusConvergence { gap: f64, best: Box<EdgeDensity> },

    /// An invariant that must hold for correct solves was observed to fail,
    /// usually because a tolerance is too loose.
    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Parse { .. } | Error::Io(_) => 1,
            Error::Convergence { .. } | Error::ModulusConvergence { .. } => 2,
            Error::Consistency(_) => 3,
        }
    }
}
