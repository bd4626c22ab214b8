//! LU factorization with partial pivoting.
//!
//! Hand-rolled rather than delegated: parameter continuation deliberately
//! runs the Jacobian into a fold, and the caller needs to see exactly which
//! pivot fell below the singularity tolerance.

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, EPS};

/// Packed LU factors of a square matrix, PA = LU.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

/// Factors `a` with partial pivoting.
///
/// A pivot with |pivot| <= N * eps * max|a_ij| signals singularity and is
/// reported together with its column.
pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactors> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "LU requires a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let pivot_tol = n as f64 * EPS * a.max_abs();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].abs();
        for i in (k + 1)..n {
            let v = lu[(i, k)].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best <= pivot_tol {
            return Err(Error::SingularMatrix { column: k, pivot: lu[(p, k)] });
        }
        if p != k {
            perm.swap(k, p);
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let m = lu[(i, k)] / pivot;
            lu[(i, k)] = m;
            for j in (k + 1)..n {
                let upd = m * lu[(k, j)];
                lu[(i, j)] -= upd;
            }
        }
    }
    Ok(LuFactors { lu, perm })
}

impl LuFactors {
    pub fn n(&self) -> usize {
        self.lu.rows()
    }

    /// Solves A x = b using the packed factors.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "rhs length {} does not match matrix order {n}",
                b.len()
            )));
        }
        // Forward substitution on the permuted rhs.
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        // Back substitution.
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }
}

/// One-shot factorization and solve.
pub fn lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    lu_factor(a)?.solve(b)
}
