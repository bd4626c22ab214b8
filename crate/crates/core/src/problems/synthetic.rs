//! Generator for operators of the form A = I + K + E with rank(K) = p
//! exactly and ‖E‖₂ = eps, the setting of the GMRES clustering bound.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gmres::LinearOperator;
use crate::linalg::{axpy, dot, normalize, svd, DenseMatrix};

/// A = I + K + E held in dense form, with the planted splitting exposed.
#[derive(Debug, Clone)]
pub struct SyntheticClusterOperator {
    matrix: DenseMatrix,
    k: DenseMatrix,
    e: DenseMatrix,
    rank: usize,
    e_norm: f64,
}

impl SyntheticClusterOperator {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// The planted low-rank term.
    pub fn k(&self) -> &DenseMatrix {
        &self.k
    }

    /// The planted small remainder.
    pub fn e(&self) -> &DenseMatrix {
        &self.e
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn e_norm(&self) -> f64 {
        self.e_norm
    }
}

impl LinearOperator for SyntheticClusterOperator {
    fn dimension(&self) -> usize {
        self.matrix.rows()
    }
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.matrix.matvec(x));
    }
}

/// Builds I + K + E with rank(K) = p exactly and ‖E‖₂ = eps.
///
/// K = Σ d_i q_i q_iᵀ over an orthonormal set with d_i in [0.5, 1.5], so
/// the spectrum of I + K sits in [1, 2.5], bounded away from zero. E is a
/// dense sample rescaled to the requested spectral norm. Deterministic per
/// seed.
pub fn synthetic_cluster_operator(
    dimension: usize,
    p: usize,
    eps: f64,
    seed: u64,
) -> Result<SyntheticClusterOperator> {
    if p >= dimension {
        return Err(Error::Precondition(format!(
            "rank p = {p} must be below the dimension {dimension}"
        )));
    }
    if eps < 0.0 {
        return Err(Error::Precondition(format!("eps must be nonnegative, got {eps}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Orthonormal directions for the low-rank term.
    let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(p);
    while dirs.len() < p {
        let mut v: Vec<f64> = (0..dimension).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        for q in &dirs {
            let c = dot(&v, q);
            axpy(&mut v, -c, q);
        }
        if crate::linalg::norm(&v) > 1e-8 {
            normalize(&mut v)?;
            dirs.push(v);
        }
    }
    let weights: Vec<f64> = (0..p).map(|_| 0.5 + rng.gen::<f64>()).collect();

    let mut k = DenseMatrix::zeros(dimension, dimension);
    for (q, d) in dirs.iter().zip(&weights) {
        for i in 0..dimension {
            for j in 0..dimension {
                k[(i, j)] += d * q[i] * q[j];
            }
        }
    }

    let e = if eps == 0.0 {
        DenseMatrix::zeros(dimension, dimension)
    } else {
        let raw = DenseMatrix::from_fn(dimension, dimension, |_, _| {
            rng.gen::<f64>() * 2.0 - 1.0
        });
        let top = svd(&raw)?.sigma_max();
        raw.scaled(eps / top)
    };

    let mut matrix = DenseMatrix::identity(dimension).add(&k).add(&e);
    // Round trip through the constructor to keep the finiteness contract.
    matrix = DenseMatrix::new(dimension, dimension, matrix.entries().to_vec())?;

    Ok(SyntheticClusterOperator { matrix, k, e, rank: p, e_norm: eps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmres::{check_linearity, gmres_solve};

    #[test]
    fn trivial_case_is_identity() {
        let op = synthetic_cluster_operator(8, 0, 0.0, 1).unwrap();
        assert_eq!(op.matrix(), &DenseMatrix::identity(8));
    }

    #[test]
    fn planted_rank_is_exact() {
        let op = synthetic_cluster_operator(30, 3, 0.0, 7).unwrap();
        let sv = svd(op.k()).unwrap();
        assert!(sv.singular_values[2] > 0.4);
        assert!(sv.singular_values[3] < 1e-12);
        // GMRES terminates at the minimal-polynomial degree p + 1.
        let b: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let t = gmres_solve(&op, &b, &vec![0.0; 30], 1e-12, 30).unwrap();
        assert!(t.converged);
        assert!(t.iterations <= 4, "took {} iterations", t.iterations);
    }

    #[test]
    fn e_norm_is_requested() {
        let op = synthetic_cluster_operator(25, 2, 1e-3, 11).unwrap();
        let top = svd(op.e()).unwrap().sigma_max();
        assert!((top - 1e-3).abs() <= 1e-9);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = synthetic_cluster_operator(12, 2, 1e-2, 5).unwrap();
        let b = synthetic_cluster_operator(12, 2, 1e-2, 5).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = synthetic_cluster_operator(12, 2, 1e-2, 6).unwrap();
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn operator_is_linear() {
        let op = synthetic_cluster_operator(10, 2, 1e-2, 3).unwrap();
        assert!(check_linearity(&op, 2, 10));
    }

    #[test]
    fn invalid_rank_rejected() {
        assert!(synthetic_cluster_operator(5, 5, 0.0, 1).is_err());
    }
}
