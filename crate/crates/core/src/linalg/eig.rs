//! Symmetric eigendecomposition with a descending-order contract.

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, EPS};

/// A = Q diag(β) Qᵀ with β_1 >= ... >= β_N; eigenvector columns match the
/// eigenvalue order.
#[derive(Debug, Clone)]
pub struct SymEigResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DenseMatrix,
}

impl SymEigResult {
    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().expect("at least one eigenvalue")
    }

    /// Eigenvector for the smallest eigenvalue (last column).
    pub fn vector_min(&self) -> Vec<f64> {
        self.eigenvectors.column(self.eigenvectors.cols() - 1)
    }
}

/// Decomposes a symmetric matrix.
///
/// The input may carry rounding from products like A Aᵀ: asymmetry up to
/// 1e-12 * max(1, max|a_ij|) is accepted and symmetrized away as (A + Aᵀ)/2
/// before factorization; anything larger is a precondition error.
pub fn sym_eig(a: &DenseMatrix) -> Result<SymEigResult> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "symmetric eigendecomposition requires a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let tol = 1e-12 * a.max_abs().max(1.0);
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            defect = defect.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if defect > tol {
        return Err(Error::Precondition(format!(
            "matrix is not symmetric: max |a_ij - a_ji| = {defect:.3e} > {tol:.3e}"
        )));
    }
    let sym = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let fact = nalgebra::linalg::SymmetricEigen::try_new(sym, EPS, 0)
        .ok_or(Error::FactorizationFailed("symmetric QR iteration did not converge"))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        fact.eigenvalues[j]
            .partial_cmp(&fact.eigenvalues[i])
            .expect("eigenvalues are finite")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| fact.eigenvalues[i]).collect();
    let eigenvectors =
        DenseMatrix::from_fn(n, n, |i, j| fact.eigenvectors[(i, order[j])]);
    Ok(SymEigResult { eigenvalues, eigenvectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::svd::orthogonality_defect;
    use crate::linalg::{axpy, norm, scale, svd};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_eigenvalues_descend() {
        let a = DenseMatrix::new(3, 3, vec![2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0])
            .unwrap();
        let e = sym_eig(&a).unwrap();
        assert_eq!(e.eigenvalues, vec![2.0, 1.0, 0.0]);
        // Eigenvectors are axis vectors up to sign.
        for j in 0..3 {
            let col = e.eigenvectors.column(j);
            let mx = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!((mx - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_projector() {
        let s = 0.5f64.sqrt();
        let y = [s, s];
        let a = DenseMatrix::from_fn(2, 2, |i, j| y[i] * y[j]);
        let e = sym_eig(&a).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() <= 1e-14);
        assert!(e.eigenvalues[1].abs() <= 1e-14);
    }

    #[test]
    fn random_symmetric_residual_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 6;
        let b = DenseMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5);
        let a = b.add(&b.transpose()).scaled(0.5);
        let e = sym_eig(&a).unwrap();
        let tol = 100.0 * n as f64 * EPS * e.eigenvalues[0].abs().max(1.0);
        for j in 0..n {
            let v = e.eigenvectors.column(j);
            let mut r = a.matvec(&v);
            axpy(&mut r, -e.eigenvalues[j], &v);
            assert!(norm(&r) <= tol, "eigen residual {} > {}", norm(&r), tol);
        }
        assert!(orthogonality_defect(&e.eigenvectors) <= tol);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let a = DenseMatrix::new(2, 2, vec![1.0, 0.5, 0.0, 1.0]).unwrap();
        assert!(matches!(sym_eig(&a), Err(Error::Precondition(_))));
    }

    #[test]
    fn eigenvalues_of_bbt_are_squared_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [2usize, 5, 12, 20] {
            let b = DenseMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
            let a = b.times_transpose();
            let eig = sym_eig(&a).unwrap();
            let sv = svd(&b).unwrap();
            for (beta, sigma) in eig.eigenvalues.iter().zip(&sv.singular_values) {
                let expected = sigma * sigma;
                let scale_ref = eig.eigenvalues[0].abs().max(1e-30);
                assert!(
                    (beta - expected).abs() <= 1e-10 * scale_ref,
                    "beta {beta} vs sigma^2 {expected}"
                );
            }
        }
    }

    #[test]
    fn normalize_helper_rejects_zero() {
        let mut v = [0.0, 0.0];
        assert!(crate::linalg::normalize(&mut v).is_err());
        let mut w = [3.0, 4.0];
        let n = crate::linalg::normalize(&mut w).unwrap();
        assert!((n - 5.0).abs() < 1e-15);
        assert!((norm(&w) - 1.0).abs() < 1e-15);
        scale(&mut w, 2.0);
        assert!((norm(&w) - 2.0).abs() < 1e-14);
    }
}
