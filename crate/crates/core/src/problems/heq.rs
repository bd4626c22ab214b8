//! The Chandrasekhar H-equation from radiative transfer,
//!
//!   H(μ) = 1 + (c/2) H(μ) ∫₀¹ H(ν) μ/(μ+ν) dν,
//!
//! in the inverted form G(H, c)(μ) = H(μ) - (1 - (c/2)∫ μ H(ν)/(μ+ν) dν)⁻¹,
//! discretized with the composite midpoint rule on N nodes. The solution
//! path in c has a simple fold at c = 1; the closed-form norm identity
//! ‖H‖₁ = (1 ± sqrt(1-c))/(c/2) pins both branches.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::par;
use crate::problems::ProblemDef;

/// Midpoint-rule discretization: nodes μ_i = (i - 1/2)/N, weight 1/N, and
/// the cached kernel matrix μ_i/(μ_i + μ_j).
#[derive(Debug, Clone)]
pub struct HeqDiscretization {
    nodes: usize,
    mu: Vec<f64>,
    kernel: DenseMatrix,
}

/// Denominators this close to zero mean the iterate left the domain where
/// the inverted form is defined.
const DENOM_FLOOR: f64 = 1e-12;

impl HeqDiscretization {
    pub fn new(nodes: usize) -> Self {
        assert!(nodes >= 1, "need at least one node");
        let mu: Vec<f64> = (1..=nodes).map(|i| (i as f64 - 0.5) / nodes as f64).collect();
        let mut entries = vec![0.0; nodes * nodes];
        let mu_ref = &mu;
        par::fill_rows(&mut entries, nodes, |i, row| {
            let mi = mu_ref[i];
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = mi / (mi + mu_ref[j]);
            }
        });
        let kernel = DenseMatrix::new(nodes, nodes, entries).expect("kernel entries are finite");
        Self { nodes, mu, kernel }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn kernel(&self) -> &DenseMatrix {
        &self.kernel
    }

    /// Discrete ‖H‖₁ under the same midpoint quadrature: (1/N) Σ H_i.
    pub fn discrete_norm(&self, h: &[f64]) -> f64 {
        h.iter().sum::<f64>() / self.nodes as f64
    }

    /// The quadrature sums S_i = (1/N) Σ_j μ_i H_j/(μ_i + μ_j).
    fn kernel_sums(&self, h: &[f64]) -> Vec<f64> {
        let w = 1.0 / self.nodes as f64;
        self.kernel.matvec(h).iter().map(|s| s * w).collect()
    }

    /// Denominators L_i = 1 - (c/2) S_i, failing when any |L_i| hits the
    /// domain floor.
    fn denominators(&self, h: &[f64], c: f64) -> Result<Vec<f64>> {
        let sums = self.kernel_sums(h);
        let l: Vec<f64> = sums.iter().map(|s| 1.0 - 0.5 * c * s).collect();
        if let Some(i) = l.iter().position(|v| v.abs() < DENOM_FLOOR || !v.is_finite()) {
            return Err(Error::EvaluationDomain(format!(
                "H-equation denominator L_{i} = {:.3e} at c = {c}",
                l[i]
            )));
        }
        Ok(l)
    }

    /// G_i = H_i - 1/L_i.
    pub fn residual(&self, h: &[f64], c: f64) -> Result<Vec<f64>> {
        self.check_dim(h)?;
        let l = self.denominators(h, c)?;
        Ok(h.iter().zip(&l).map(|(hi, li)| hi - 1.0 / li).collect())
    }

    /// Exact derivative of the discrete residual:
    /// ∂G_i/∂H_j = δ_ij - L_i⁻² (c/(2N)) μ_i/(μ_i + μ_j).
    ///
    /// Row-parallel when the `parallel` feature is on; entries are
    /// identical either way.
    pub fn jacobian(&self, h: &[f64], c: f64) -> Result<DenseMatrix> {
        self.check_dim(h)?;
        let l = self.denominators(h, c)?;
        let n = self.nodes;
        let mut entries = vec![0.0; n * n];
        let kernel = &self.kernel;
        let factor = 0.5 * c / n as f64;
        let l_ref = &l;
        par::fill_rows(&mut entries, n, |i, row| {
            let scale = factor / (l_ref[i] * l_ref[i]);
            let krow = kernel.row(i);
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = -scale * krow[j];
            }
            row[i] += 1.0;
        });
        DenseMatrix::new(n, n, entries)
    }

    /// Sequential twin of [`Self::jacobian`], kept callable for the benches.
    pub fn jacobian_seq(&self, h: &[f64], c: f64) -> Result<DenseMatrix> {
        self.check_dim(h)?;
        let l = self.denominators(h, c)?;
        let n = self.nodes;
        let mut entries = vec![0.0; n * n];
        let kernel = &self.kernel;
        let factor = 0.5 * c / n as f64;
        let l_ref = &l;
        par::fill_rows_seq(&mut entries, n, |i, row| {
            let scale = factor / (l_ref[i] * l_ref[i]);
            let krow = kernel.row(i);
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = -scale * krow[j];
            }
            row[i] += 1.0;
        });
        DenseMatrix::new(n, n, entries)
    }

    /// ∂G_i/∂c = -L_i⁻² (1/(2N)) Σ_j μ_i H_j/(μ_i + μ_j).
    pub fn c_derivative(&self, h: &[f64], c: f64) -> Result<Vec<f64>> {
        self.check_dim(h)?;
        let l = self.denominators(h, c)?;
        let sums = self.kernel_sums(h);
        Ok(l.iter().zip(&sums).map(|(li, si)| -0.5 * si / (li * li)).collect())
    }

    fn check_dim(&self, h: &[f64]) -> Result<()> {
        if h.len() != self.nodes {
            return Err(Error::DimensionMismatch(format!(
                "H has length {}, discretization has {} nodes",
                h.len(),
                self.nodes
            )));
        }
        Ok(())
    }
}

/// Closed-form branch norms from the integrated H-equation:
/// ‖H‖₁ = (1 ± sqrt(1 - c))/(c/2); the lower branch takes the minus sign.
pub fn closed_form_norm_lower(c: f64) -> f64 {
    if c == 0.0 {
        return 1.0;
    }
    (1.0 - (1.0 - c).sqrt()) / (0.5 * c)
}

pub fn closed_form_norm_upper(c: f64) -> f64 {
    (1.0 + (1.0 - c).sqrt()) / (0.5 * c)
}

/// The H-equation as a continuation problem in λ = c.
#[derive(Debug, Clone)]
pub struct HeqProblem {
    disc: HeqDiscretization,
}

impl HeqProblem {
    pub fn new(nodes: usize) -> Self {
        Self { disc: HeqDiscretization::new(nodes) }
    }

    pub fn discretization(&self) -> &HeqDiscretization {
        &self.disc
    }
}

impl ProblemDef for HeqProblem {
    fn dimension(&self) -> usize {
        self.disc.nodes()
    }

    fn id(&self) -> String {
        format!("heq-n{}", self.disc.nodes())
    }

    fn residual(&self, u: &[f64], lambda: f64) -> Result<Vec<f64>> {
        self.disc.residual(u, lambda)
    }

    fn jacobian(&self, u: &[f64], lambda: f64) -> Result<DenseMatrix> {
        self.disc.jacobian(u, lambda)
    }

    fn lambda_derivative(&self, u: &[f64], lambda: f64) -> Result<Vec<f64>> {
        self.disc.c_derivative(u, lambda)
    }

    fn functional(&self, u: &[f64]) -> f64 {
        self.disc.discrete_norm(u)
    }
}
