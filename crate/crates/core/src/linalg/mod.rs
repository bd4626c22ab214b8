//! Dense linear algebra: storage, LU with partial pivoting, SVD and
//! symmetric eigendecomposition, plus the small vector kernels used
//! throughout the crate.
//!
//! Everything operates on real `f64` data. Factorizations validate the
//! contracts the rest of the crate relies on (ordering, orthogonality,
//! residuals); see the tests at the bottom of each submodule.

mod eig;
mod lu;
mod svd;

pub use eig::{sym_eig, SymEigResult};
pub use lu::{lu_factor, lu_solve, LuFactors};
pub use svd::{svd, SvdResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Machine epsilon for `f64`.
pub const EPS: f64 = f64::EPSILON;

/// Dense real matrix, row-major storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must have at least one row and column, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                entries[i * cols + j] = f(i, j);
            }
        }
        Self { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Largest entry magnitude; zero-sized matrices cannot be constructed.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// Matrix product, row-parallel when the `parallel` feature is enabled.
    ///
    /// Each output entry is a single sequential dot product, so the result
    /// does not depend on the thread count.
    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let (m, n, k) = (self.rows, rhs.cols, self.cols);
        let mut entries = vec![0.0; m * n];
        par::fill_rows(&mut entries, n, |i, out_row| {
            mul_row(self.row(i), rhs, k, n, out_row);
        });
        DenseMatrix { rows: m, cols: n, entries }
    }

    /// Sequential matrix product; same arithmetic as [`Self::matmul`].
    pub fn matmul_seq(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let (m, n, k) = (self.rows, rhs.cols, self.cols);
        let mut entries = vec![0.0; m * n];
        par::fill_rows_seq(&mut entries, n, |i, out_row| {
            mul_row(self.row(i), rhs, k, n, out_row);
        });
        DenseMatrix { rows: m, cols: n, entries }
    }

    /// A Aᵀ, the symmetric product used by the fold-conditioning checks.
    pub fn times_transpose(&self) -> DenseMatrix {
        self.matmul(&self.transpose())
    }

    pub fn scaled(&self, t: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|v| v * t).collect(),
        }
    }

    pub fn add(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Spectral norm via SVD.
    pub fn norm2(&self) -> Result<f64> {
        Ok(svd(self)?.singular_values[0])
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    pub(crate) fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Self {
        DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

fn mul_row(lhs_row: &[f64], rhs: &DenseMatrix, k: usize, n: usize, out: &mut [f64]) {
    for l in 0..k {
        let a = lhs_row[l];
        if a == 0.0 {
            continue;
        }
        let rhs_row = rhs.row(l);
        for j in 0..n {
            out[j] += a * rhs_row[j];
        }
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.entries[i * self.cols + j]
    }
}

// Small vector kernels. Plain loops; the optimizer does fine with these.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// y += t x
pub fn axpy(y: &mut [f64], t: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += t * xi;
    }
}

pub fn scale(y: &mut [f64], t: f64) {
    for yi in y.iter_mut() {
        *yi *= t;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add_scaled(a: &[f64], t: f64, b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + t * y).collect()
}

/// Normalizes in place; errors on the zero vector.
pub fn normalize(v: &mut [f64]) -> Result<f64> {
    let n = norm(v);
    if n == 0.0 {
        return Err(Error::Precondition("cannot normalize the zero vector".into()));
    }
    scale(v, 1.0 / n);
    Ok(n)
}
