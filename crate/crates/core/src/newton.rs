//! Newton's method with interchangeable linear-solve backends: direct LU on
//! an assembled Jacobian, or matrix-free GMRES with finite-difference
//! directional derivatives. A convergence-order monitor estimates the
//! q-order from the step-norm history.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gmres::{gmres_solve, FnOperator};
use crate::linalg::{self, lu_factor, norm, sub, DenseMatrix, EPS};

/// Stopping parameters shared by both backends.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NewtonTols {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonTols {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_iter: 20 }
    }
}

/// Outcome of a Newton run.
#[derive(Debug, Clone, Serialize)]
pub struct NewtonResult {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub step_norms: Vec<f64>,
    pub residual_norms: Vec<f64>,
    /// Inner iteration counts, one per Newton step; empty for the direct
    /// backend.
    pub gmres_iterations_per_step: Vec<usize>,
    pub converged: bool,
    /// Least-squares slope of log‖s_{k+1}‖ against log‖s_k‖; absent with
    /// fewer than three usable steps.
    pub q_order_estimate: Option<f64>,
}

impl NewtonResult {
    pub fn final_residual(&self) -> f64 {
        *self.residual_norms.last().expect("residual history is never empty")
    }

    /// Mean inner iterations per Newton step; zero for the direct backend.
    pub fn average_inner_iterations(&self) -> f64 {
        if self.gmres_iterations_per_step.is_empty() {
            0.0
        } else {
            self.gmres_iterations_per_step.iter().sum::<usize>() as f64
                / self.gmres_iterations_per_step.len() as f64
        }
    }
}

/// Newton iteration with an assembled Jacobian solved by LU.
///
/// A singular Jacobian is reported as an error carrying the iterate — this
/// is precisely how parameter continuation fails at a fold.
pub fn newton_direct<F, J>(
    mut residual: F,
    mut jacobian: J,
    x0: &[f64],
    tols: &NewtonTols,
) -> Result<NewtonResult>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
    J: FnMut(&[f64]) -> Result<DenseMatrix>,
{
    let mut x = x0.to_vec();
    let mut f = residual(&x)?;
    let initial = norm(&f);
    let mut residual_norms = vec![initial];
    let mut step_norms = Vec::new();
    let target = tols.abs_tol + tols.rel_tol * initial;

    let mut iterations = 0;
    let mut converged = initial <= target;
    while !converged && iterations < tols.max_iter {
        let jac = jacobian(&x)?;
        let factors = match lu_factor(&jac) {
            Ok(f) => f,
            Err(Error::SingularMatrix { column, .. }) => {
                return Err(Error::SingularJacobian { column, iterate: x });
            }
            Err(e) => return Err(e),
        };
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let step = factors.solve(&rhs)?;
        linalg::axpy(&mut x, 1.0, &step);
        step_norms.push(norm(&step));
        f = residual(&x)?;
        let r = norm(&f);
        residual_norms.push(r);
        iterations += 1;
        converged = r <= target;
    }

    let q_order_estimate = q_order_estimate(&step_norms);
    Ok(NewtonResult {
        solution: x,
        iterations,
        step_norms,
        residual_norms,
        gmres_iterations_per_step: Vec::new(),
        converged,
        q_order_estimate,
    })
}

/// Matrix-free Newton-GMRES.
///
/// Each step solves J(x) s = -F(x) by GMRES at the fixed relative tolerance
/// `forcing`, approximating J v by the forward quotient
/// (F(x + h v) - F(x))/h with h = sqrt(eps) (1 + ‖x‖)/‖v‖. Inner iteration
/// counts are recorded per step. A stalled inner solve rejects the step and
/// surfaces the trace.
pub fn newton_gmres<F>(
    residual: F,
    x0: &[f64],
    forcing: f64,
    tols: &NewtonTols,
) -> Result<NewtonResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut f = residual(&x)?;
    let initial = norm(&f);
    let mut residual_norms = vec![initial];
    let mut step_norms = Vec::new();
    let mut gmres_iterations_per_step = Vec::new();
    let target = tols.abs_tol + tols.rel_tol * initial;

    let mut iterations = 0;
    let mut converged = initial <= target;
    while !converged && iterations < tols.max_iter {
        let base_x = x.clone();
        let base_f = f.clone();
        let x_norm = norm(&base_x);
        let op = FnOperator::new(n, |v: &[f64], out: &mut [f64]| {
            let v_norm = norm(v);
            if v_norm == 0.0 {
                out.fill(0.0);
                return;
            }
            let h = EPS.sqrt() * (1.0 + x_norm) / v_norm;
            let shifted = linalg::add_scaled(&base_x, h, v);
            match residual(&shifted) {
                Ok(fv) => {
                    for i in 0..n {
                        out[i] = (fv[i] - base_f[i]) / h;
                    }
                }
                // A probe outside the domain poisons the product; the
                // outer convergence check sees the NaNs and rejects.
                Err(_) => out.fill(f64::NAN),
            }
        });
        let rhs: Vec<f64> = base_f.iter().map(|v| -v).collect();
        let trace = gmres_solve(&op, &rhs, &vec![0.0; n], forcing, n)?;
        if !trace.converged || trace.solution.iter().any(|v| !v.is_finite()) {
            let relative_residual = trace.final_residual() / trace.residual_norms[0].max(1e-300);
            return Err(Error::GmresStalled {
                iterations: trace.iterations,
                relative_residual,
                trace: Box::new(trace),
            });
        }
        gmres_iterations_per_step.push(trace.iterations);
        step_norms.push(norm(&trace.solution));
        linalg::axpy(&mut x, 1.0, &trace.solution);
        f = residual(&x)?;
        let r = norm(&f);
        residual_norms.push(r);
        iterations += 1;
        converged = r <= target;
    }

    let q_order_estimate = q_order_estimate(&step_norms);
    Ok(NewtonResult {
        solution: x,
        iterations,
        step_norms,
        residual_norms,
        gmres_iterations_per_step,
        converged,
        q_order_estimate,
    })
}

/// Convergence-order estimate: the least-squares slope of
/// log‖s_{k+1}‖ vs log‖s_k‖ over the decreasing, nonzero prefix of the
/// step-norm history. Roughly 2 for q-quadratic convergence, 1 for linear.
/// Needs at least three usable steps.
pub fn q_order_estimate(step_norms: &[f64]) -> Option<f64> {
    let mut usable = Vec::new();
    for &s in step_norms {
        if s <= 0.0 || (!usable.is_empty() && s >= *usable.last().unwrap()) {
            break;
        }
        usable.push(s);
    }
    if usable.len() < 3 {
        return None;
    }
    let xs: Vec<f64> = usable[..usable.len() - 1].iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = usable[1..].iter().map(|s| s.ln()).collect();
    let m = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / m;
    let mean_y = ys.iter().sum::<f64>() / m;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    if den == 0.0 {
        return None;
    }
    Some(num / den)
}

/// Gradient check used by the problem tests: compares an analytic
/// Jacobian-vector product against the forward finite-difference quotient.
pub fn jacobian_vector_fd<F>(residual: F, x: &[f64], v: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let v_norm = norm(v);
    if v_norm == 0.0 {
        return Ok(vec![0.0; x.len()]);
    }
    let h = EPS.sqrt() * (1.0 + norm(x)) / v_norm;
    let f0 = residual(x)?;
    let f1 = residual(&linalg::add_scaled(x, h, v))?;
    Ok(sub(&f1, &f0).iter().map(|d| d / h).collect())
}
