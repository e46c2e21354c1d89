use std::fmt;

use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Lex {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Elaborate(String),

    #[error("invalid circuit: {0}")]
    Circuit(String),

    #[error("singular matrix: node '{node}' appears to be floating")]
    Singular { node: String },

    #[error("{0}")]
    NonConvergence(Box<ConvergenceFailure>),

    #[error("analysis error: {0}")]
    Analysis(String),
}

impl Error {
    /// True for failures caused by the numerics rather than the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. } | Error::NonConvergence(_) | Error::Analysis(_)
        )
    }
}

/// Diagnostic attached to a Newton failure.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceFailure {
    pub strategy: String,
    pub iterations: usize,
    pub worst_node: String,
    pub residual: f64,
}

impl fmt::Display for ConvergenceFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "no convergence: strategy={} iterations={} worst_node={} residual={:.3e}",
            self.strategy, self.iterations, self.worst_node, self.residual
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
