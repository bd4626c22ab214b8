//! Restart-free GMRES over an abstract linear operator, with the complete
//! residual history captured for the eigenvalue-clustering experiments.
//!
//! Arnoldi with modified Gram-Schmidt (one reorthogonalization pass when
//! orthogonality degrades), and an incrementally updated Givens QR of the
//! Hessenberg matrix so every iteration yields its residual norm for free.
//! No restarting: the minimal-polynomial iteration counts are the point.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, scale, DenseMatrix};

/// Matrix-vector product contract. `apply` must be linear; implementations
/// must be safe to call from multiple threads at once.
pub trait LinearOperator: Sync {
    fn dimension(&self) -> usize;
    /// out = A x.
    fn apply(&self, x: &[f64], out: &mut [f64]);
}

/// Dense matrix as an operator.
pub struct DenseOperator<'a> {
    matrix: &'a DenseMatrix,
}

impl<'a> DenseOperator<'a> {
    pub fn new(matrix: &'a DenseMatrix) -> Self {
        assert!(matrix.is_square(), "operator matrix must be square");
        Self { matrix }
    }
}

impl LinearOperator for DenseOperator<'_> {
    fn dimension(&self) -> usize {
        self.matrix.rows()
    }
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.matrix.matvec(x));
    }
}

/// Closure-backed operator, used for matrix-free Jacobian-vector products.
pub struct FnOperator<F: Fn(&[f64], &mut [f64]) + Sync> {
    dimension: usize,
    apply_fn: F,
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> FnOperator<F> {
    pub fn new(dimension: usize, apply_fn: F) -> Self {
        Self { dimension, apply_fn }
    }
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> LinearOperator for FnOperator<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        (self.apply_fn)(x, out)
    }
}

/// Solve record: ‖r_0‖, ‖r_1‖, ... (one entry per iteration after the
/// initial residual), the iterate count, and the final solution.
#[derive(Debug, Clone, Serialize)]
pub struct GmresTrace {
    pub residual_norms: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub solution: Vec<f64>,
}

impl GmresTrace {
    pub fn final_residual(&self) -> f64 {
        *self.residual_norms.last().expect("trace holds at least the initial residual")
    }
}

/// Full GMRES for op x = b starting from x0.
///
/// Requires rel_tol in (0,1) and max_iter <= dimension (full GMRES
/// terminates within `dimension` steps in exact arithmetic, so a larger
/// budget is a caller bug). Happy breakdown counts as convergence; an
/// exhausted budget returns converged = false with the full trace.
pub fn gmres_solve(
    op: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<GmresTrace> {
    let n = op.dimension();
    if b.len() != n || x0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator dimension {n}, rhs length {}, initial guess length {}",
            b.len(),
            x0.len()
        )));
    }
    if !(0.0..1.0).contains(&rel_tol) || rel_tol == 0.0 {
        return Err(Error::Precondition(format!(
            "relative tolerance must lie in (0, 1), got {rel_tol}"
        )));
    }
    if max_iter > n {
        return Err(Error::Precondition(format!(
            "max_iter {max_iter} exceeds operator dimension {n}"
        )));
    }

    let mut ax = vec![0.0; n];
    op.apply(x0, &mut ax);
    let mut r0: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let beta = norm(&r0);
    let mut residual_norms = vec![beta];

    if beta == 0.0 {
        return Ok(GmresTrace {
            residual_norms,
            iterations: 0,
            converged: true,
            solution: x0.to_vec(),
        });
    }
    let target = rel_tol * beta;

    // Krylov basis, Hessenberg columns (rotated in place), Givens pairs,
    // and the rotated rhs g.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_iter + 1);
    scale(&mut r0, 1.0 / beta);
    basis.push(r0);
    let mut h_cols: Vec<Vec<f64>> = Vec::with_capacity(max_iter);
    let mut givens: Vec<(f64, f64)> = Vec::with_capacity(max_iter);
    let mut g = vec![beta];

    let mut iterations = 0;
    let mut converged = false;

    for k in 0..max_iter {
        iterations = k + 1;
        let mut w = vec![0.0; n];
        op.apply(&basis[k], &mut w);
        let w_norm_before = norm(&w);

        // Modified Gram-Schmidt.
        let mut h = vec![0.0; k + 2];
        for (j, v) in basis.iter().enumerate() {
            let c = dot(&w, v);
            h[j] = c;
            axpy(&mut w, -c, v);
        }
        // One reorthogonalization pass when orthogonality has degraded.
        let overlap = basis
            .iter()
            .map(|v| dot(&w, v).abs())
            .fold(0.0f64, f64::max);
        if overlap > 1e-8 * norm(&w).max(1e-300) {
            for (j, v) in basis.iter().enumerate() {
                let c = dot(&w, v);
                h[j] += c;
                axpy(&mut w, -c, v);
            }
        }
        let h_next = norm(&w);
        h[k + 1] = h_next;

        // Apply the accumulated rotations to the new column.
        for (j, &(c, s)) in givens.iter().enumerate() {
            let t = c * h[j] + s * h[j + 1];
            h[j + 1] = -s * h[j] + c * h[j + 1];
            h[j] = t;
        }
        let (c, s) = givens_pair(h[k], h[k + 1]);
        let t = c * h[k] + s * h[k + 1];
        h[k] = t;
        h[k + 1] = 0.0;
        givens.push((c, s));
        g.push(-s * g[k]);
        g[k] *= c;

        let res = g[k + 1].abs();
        residual_norms.push(res);
        h_cols.push(h);

        let happy_breakdown = h_next <= 1e-14 * w_norm_before.max(1e-300);
        if res <= target || happy_breakdown {
            converged = true;
            break;
        }
        scale(&mut w, 1.0 / h_next);
        basis.push(w);
    }

    // Back-substitute the triangular system and expand along the basis.
    let k_done = iterations;
    let mut y = vec![0.0; k_done];
    for i in (0..k_done).rev() {
        let mut s = g[i];
        for (j, yj) in y.iter().enumerate().take(k_done).skip(i + 1) {
            s -= h_cols[j][i] * yj;
        }
        y[i] = s / h_cols[i][i];
    }
    let mut solution = x0.to_vec();
    for (j, yj) in y.iter().enumerate() {
        axpy(&mut solution, *yj, &basis[j]);
    }

    Ok(GmresTrace { residual_norms, iterations, converged, solution })
}

fn givens_pair(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else if a.abs() > b.abs() {
        let t = b / a;
        let c = 1.0 / (1.0 + t * t).sqrt();
        (c.copysign(1.0), c * t)
    } else {
        let t = a / b;
        let s = 1.0 / (1.0 + t * t).sqrt();
        (s * t, s)
    }
}

/// Test helper for the operator contract: checks apply(ax + by) against
/// a apply(x) + b apply(y) on random probes.
pub fn check_linearity(op: &dyn LinearOperator, seed: u64, probes: usize) -> bool {
    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = op.dimension();
    for _ in 0..probes {
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let (a, b) = (rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
        let combo: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| a * xi + b * yi).collect();
        let mut lhs = vec![0.0; n];
        op.apply(&combo, &mut lhs);
        let mut ax = vec![0.0; n];
        op.apply(&x, &mut ax);
        let mut by = vec![0.0; n];
        op.apply(&y, &mut by);
        let rhs: Vec<f64> = ax.iter().zip(&by).map(|(xi, yi)| a * xi + b * yi).collect();
        let scale_ref = norm(&rhs).max(1.0);
        let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(l, r)| l - r).collect();
        if norm(&diff) > 1e-8 * scale_ref {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::lu_solve;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_converges_in_one_iteration() {
        let a = DenseMatrix::identity(6);
        let op = DenseOperator::new(&a);
        let b: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let t = gmres_solve(&op, &b, &vec![0.0; 6], 1e-12, 6).unwrap();
        assert!(t.converged);
        assert_eq!(t.iterations, 1);
        for (s, bi) in t.solution.iter().zip(&b) {
            assert!((s - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_update_needs_two_iterations() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20;
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let a = DenseMatrix::from_fn(n, n, |i, j| {
            (if i == j { 1.0 } else { 0.0 }) + x[i] * y[j]
        });
        let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let op = DenseOperator::new(&a);
        let t = gmres_solve(&op, &b, &vec![0.0; n], 1e-12, n).unwrap();
        assert!(t.converged);
        assert!(t.iterations <= 2, "took {} iterations", t.iterations);
        let direct = lu_solve(&a, &b).unwrap();
        for (g, d) in t.solution.iter().zip(&direct) {
            assert!((g - d).abs() < 1e-9);
        }
    }

    #[test]
    fn residuals_never_increase() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 40;
        let a = DenseMatrix::from_fn(n, n, |i, j| {
            (if i == j { 2.0 } else { 0.0 }) + 0.3 * (rng.gen::<f64>() - 0.5)
        });
        let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let op = DenseOperator::new(&a);
        let t = gmres_solve(&op, &b, &vec![0.0; n], 1e-13, n).unwrap();
        for w in t.residual_norms.windows(2) {
            assert!(w[1] <= w[0], "residuals increased: {} -> {}", w[0], w[1]);
        }
        assert!(t.converged);
        assert!(t.final_residual() <= 1e-13 * t.residual_norms[0]);
    }

    #[test]
    fn low_rank_identity_terminates_at_minimal_polynomial_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for p in 0..=10usize {
            let n = 200;
            // A = I + sum of p rank-one terms with moderate coefficients.
            let us: Vec<Vec<f64>> = (0..p)
                .map(|_| (0..n).map(|_| rng.gen::<f64>() - 0.5).collect())
                .collect();
            let vs: Vec<Vec<f64>> = (0..p)
                .map(|_| (0..n).map(|_| rng.gen::<f64>() - 0.5).collect())
                .collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            let op = FnOperator::new(n, move |x: &[f64], out: &mut [f64]| {
                out.copy_from_slice(x);
                for (u, v) in us.iter().zip(&vs) {
                    let c = dot(v, x) * 0.2;
                    axpy(out, c, u);
                }
            });
            let t = gmres_solve(&op, &b, &vec![0.0; n], 1e-12, n).unwrap();
            assert!(t.converged);
            assert!(
                t.iterations <= p + 1,
                "rank {p}: took {} iterations",
                t.iterations
            );
        }
    }

    #[test]
    fn agrees_with_direct_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 30;
        let a = DenseMatrix::from_fn(n, n, |i, j| {
            (if i == j { 3.0 } else { 0.0 }) + rng.gen::<f64>() - 0.5
        });
        let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let op = DenseOperator::new(&a);
        let t = gmres_solve(&op, &b, &vec![0.0; n], 1e-13, n).unwrap();
        let direct = lu_solve(&a, &b).unwrap();
        let rel: f64 = t
            .solution
            .iter()
            .zip(&direct)
            .map(|(g, d)| (g - d) * (g - d))
            .sum::<f64>()
            .sqrt()
            / norm(&direct);
        assert!(rel <= 1e-8, "relative gap to direct solve {rel}");
    }

    #[test]
    fn budget_exhaustion_reports_full_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 50;
        let a = DenseMatrix::from_fn(n, n, |i, j| {
            (if i == j { 1.0 + i as f64 } else { 0.0 }) + 0.5 * (rng.gen::<f64>() - 0.5)
        });
        let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let op = DenseOperator::new(&a);
        let t = gmres_solve(&op, &b, &vec![0.0; n], 1e-14, 3).unwrap();
        assert!(!t.converged);
        assert_eq!(t.iterations, 3);
        assert_eq!(t.residual_norms.len(), 4);
    }

    #[test]
    fn invalid_arguments_rejected() {
        let a = DenseMatrix::identity(3);
        let op = DenseOperator::new(&a);
        assert!(gmres_solve(&op, &[1.0; 3], &[0.0; 3], 1.5, 3).is_err());
        assert!(gmres_solve(&op, &[1.0; 3], &[0.0; 3], 1e-10, 9).is_err());
        assert!(gmres_solve(&op, &[1.0; 2], &[0.0; 3], 1e-10, 3).is_err());
    }

    #[test]
    fn zero_rhs_converges_immediately() {
        let a = DenseMatrix::identity(3);
        let op = DenseOperator::new(&a);
        let t = gmres_solve(&op, &[0.0; 3], &[0.0; 3], 1e-10, 3).unwrap();
        assert!(t.converged);
        assert_eq!(t.iterations, 0);
        assert_eq!(t.residual_norms, vec![0.0]);
    }

    #[test]
    fn dense_operator_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = DenseMatrix::from_fn(7, 7, |_, _| rng.gen::<f64>() - 0.5);
        let op = DenseOperator::new(&a);
        assert!(check_linearity(&op, 1, 20));
    }
}
