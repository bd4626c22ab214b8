//! Concrete parameterized systems G(u, λ) = 0: the discretized
//! Chandrasekhar H-equation, a scalar fold toy problem, and a synthetic
//! identity-plus-low-rank operator generator for the clustering tests.

mod heq;
mod synthetic;
mod toy;

pub use heq::{HeqDiscretization, HeqProblem};
pub use synthetic::{synthetic_cluster_operator, SyntheticClusterOperator};
pub use toy::{toy_fold_problem, ToyFoldProblem};

use crate::error::Result;
use crate::linalg::DenseMatrix;

/// A parameterized nonlinear system with Jacobian and parameter-derivative
/// access, plus a scalar path observable.
///
/// Implementations are immutable after construction and all evaluations are
/// pure, so instances can be shared across threads.
pub trait ProblemDef: Sync {
    fn dimension(&self) -> usize;

    /// Short identifier recorded in path output.
    fn id(&self) -> String;

    /// G(u, λ).
    fn residual(&self, u: &[f64], lambda: f64) -> Result<Vec<f64>>;

    /// ∂G/∂u as a dense matrix.
    fn jacobian(&self, u: &[f64], lambda: f64) -> Result<DenseMatrix>;

    /// ∂G/∂λ.
    fn lambda_derivative(&self, u: &[f64], lambda: f64) -> Result<Vec<f64>>;

    /// Scalar observable plotted against λ (for the H-equation, the
    /// discrete 1-norm of the solution).
    fn functional(&self, u: &[f64]) -> f64;
}
