use thiserror::Error;

/// Errors produced by the solvers and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix or vector construction saw a NaN or infinite entry.
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    /// Shapes of the operands do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An argument violated a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// LU elimination hit a pivot below the singularity tolerance.
    #[error("singular matrix: pivot {pivot:.3e} at column {column}")]
    SingularMatrix { column: usize, pivot: f64 },

    /// The factorization backend did not converge.
    #[error("factorization failed: {0}")]
    FactorizationFailed(&'static str),

    /// A residual evaluation left the domain where the problem is defined.
    #[error("evaluation left the problem domain: {0}")]
    EvaluationDomain(String),

    /// Newton hit a singular Jacobian; carries the iterate where it happened.
    #[error("singular Jacobian at Newton iterate (pivot column {column})")]
    SingularJacobian { column: usize, iterate: Vec<f64> },

    /// The inner GMRES solve did not reach its tolerance within the
    /// iteration budget; the full residual trace is attached.
    #[error("GMRES stalled after {iterations} iterations (relative residual {relative_residual:.3e})")]
    GmresStalled {
        iterations: usize,
        relative_residual: f64,
        trace: Box<crate::gmres::GmresTrace>,
    },

    /// A continuation run could not produce even one valid point.
    #[error("no valid starting point: {0}")]
    NoStartingPoint(String),

    /// The GMRES trace is too short for the requested envelope fit.
    #[error("insufficient data: trace has {available} residuals, need at least {needed}")]
    InsufficientData { needed: usize, available: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
