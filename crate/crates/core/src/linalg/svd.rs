//! Singular value decomposition with a validated, descending-order contract.
//!
//! The iteration itself is delegated to nalgebra's Golub-Kahan
//! implementation; this wrapper owns the ordering, the orthogonality and
//! reconstruction checks, and the error surface.

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, EPS};

/// Thin SVD A = U diag(σ) Vᵀ with σ_1 >= ... >= σ_k >= 0, k = min(rows, cols).
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdResult {
    pub fn sigma_min(&self) -> f64 {
        *self.singular_values.last().expect("at least one singular value")
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values[0]
    }

    /// Left singular vector for the smallest singular value.
    pub fn u_min(&self) -> Vec<f64> {
        self.u.column(self.u.cols() - 1)
    }

    /// U diag(σ) Vᵀ, for reconstruction checks.
    pub fn reconstruct(&self) -> DenseMatrix {
        let k = self.singular_values.len();
        let us = DenseMatrix::from_fn(self.u.rows(), k, |i, j| {
            self.u[(i, j)] * self.singular_values[j]
        });
        us.matmul(&self.v.transpose())
    }
}

/// Computes the thin SVD of `a`, sorted by descending singular value.
pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    let m = a.to_nalgebra();
    let fact = nalgebra::linalg::SVD::try_new(m, true, true, EPS, 0)
        .ok_or(Error::FactorizationFailed("SVD iteration did not converge"))?;
    let u = fact.u.expect("u requested");
    let v_t = fact.v_t.expect("v_t requested");
    let k = fact.singular_values.len();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        fact.singular_values[j]
            .partial_cmp(&fact.singular_values[i])
            .expect("singular values are finite")
    });

    let singular_values: Vec<f64> = order.iter().map(|&i| fact.singular_values[i]).collect();
    let u = DenseMatrix::from_fn(u.nrows(), k, |i, j| u[(i, order[j])]);
    let v = DenseMatrix::from_fn(v_t.ncols(), k, |i, j| v_t[(order[j], i)]);

    Ok(SvdResult { u, singular_values, v })
}

#[cfg(test)]
pub(crate) fn orthogonality_defect(q: &DenseMatrix) -> f64 {
    let qtq = q.transpose().matmul(q);
    let mut worst = 0.0f64;
    for i in 0..qtq.rows() {
        for j in 0..qtq.cols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((qtq[(i, j)] - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_has_unit_singular_values() {
        let s = svd(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(s.singular_values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_case_with_zero() {
        let a = DenseMatrix::new(2, 2, vec![3.0, 0.0, 0.0, 0.0]).unwrap();
        let s = svd(&a).unwrap();
        assert!((s.singular_values[0] - 3.0).abs() <= 100.0 * EPS);
        assert!(s.singular_values[1].abs() <= 100.0 * EPS);
        // U and V are signed permutations here.
        for q in [&s.u, &s.v] {
            for i in 0..2 {
                for j in 0..2 {
                    let v = q[(i, j)].abs();
                    assert!(v < 1e-12 || (v - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn random_matrix_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 5;
        let a = DenseMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let s = svd(&a).unwrap();
        let tol = 100.0 * n as f64 * EPS;
        assert!(orthogonality_defect(&s.u) <= tol);
        assert!(orthogonality_defect(&s.v) <= tol);
        let diff = a.sub(&s.reconstruct());
        assert!(diff.max_abs() <= tol * s.sigma_max());
        for w in s.singular_values.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(s.sigma_min() >= 0.0);
    }

    #[test]
    fn rectangular_thin_svd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = DenseMatrix::from_fn(6, 4, |_, _| rng.gen::<f64>() - 0.5);
        let s = svd(&a).unwrap();
        assert_eq!(s.u.rows(), 6);
        assert_eq!(s.u.cols(), 4);
        assert_eq!(s.v.rows(), 4);
        let diff = a.sub(&s.reconstruct());
        assert!(diff.max_abs() <= 100.0 * 6.0 * EPS * s.sigma_max());
    }
}
