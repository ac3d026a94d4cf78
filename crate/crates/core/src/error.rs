use thiserror::Error;

/// Errors reported by the doublet solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DoubletError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An operation that requires the three strict triangle inequalities was
    /// called with tensions that violate one of them.
    #[error("tensions {tensions:?} are outside the interior regime ({regime})")]
    Regime { tensions: [f64; 3], regime: String },

    #[error("the surface-only solver requires zero line tension (got kappa = {0})")]
    WrongSolver(f64),

    #[error("line tension is zero; reduced tensions are undefined")]
    UndefinedReducedTension,

    #[error("no configuration exists: {0}")]
    NoConfiguration(String),

    #[error("singular parameterization: {0}")]
    Singular(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("did not converge after {iterations} iterations (residual {residual:e}): {context}")]
    Convergence {
        context: String,
        iterations: usize,
        residual: f64,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, DoubletError>;

pub(crate) fn invalid(msg: impl Into<String>) -> DoubletError {
    DoubletError::InvalidInput(msg.into())
}
