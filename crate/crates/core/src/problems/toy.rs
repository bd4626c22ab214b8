//! Desk-scale fold problem with a closed-form path:
//! G(u, λ) = u² + λ - 1, solutions u = ±sqrt(1 - λ), simple fold at (0, 1)
//! where G_u = 2u vanishes and G_λ = 1 is outside its range.

use crate::error::Result;
use crate::linalg::DenseMatrix;
use crate::problems::ProblemDef;

#[derive(Debug, Clone, Copy)]
pub struct ToyFoldProblem;

pub fn toy_fold_problem() -> ToyFoldProblem {
    ToyFoldProblem
}

impl ProblemDef for ToyFoldProblem {
    fn dimension(&self) -> usize {
        1
    }

    fn id(&self) -> String {
        "toy-fold".to_string()
    }

    fn residual(&self, u: &[f64], lambda: f64) -> Result<Vec<f64>> {
        Ok(vec![u[0] * u[0] + lambda - 1.0])
    }

    fn jacobian(&self, u: &[f64], _lambda: f64) -> Result<DenseMatrix> {
        DenseMatrix::new(1, 1, vec![2.0 * u[0]])
    }

    fn lambda_derivative(&self, _u: &[f64], _lambda: f64) -> Result<Vec<f64>> {
        Ok(vec![1.0])
    }

    fn functional(&self, u: &[f64]) -> f64 {
        u[0]
    }
}
