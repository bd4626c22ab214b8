//! SVD-based characterization of simple folds and the conditioning bound
//! for the bordered Jacobian.
//!
//! At a path point with Jacobian blocks G_u (N x N) and G_λ (N), one SVD of
//! G_u yields the quantities the conditioning bound is built from:
//!
//!   gap = σ_{N-1}² - σ_N²          proj = u_Nᵀ G_λ
//!   ξ   = |proj| + ‖(I - u_N u_Nᵀ) G_λ‖
//!   α   = max{σ_N², proj² gap/(gap + ξ²)}
//!   τ   = ‖G_u u̇₀ + G_λ λ̇₀‖  (residual of the tangent in use)
//!
//! When τ < min(α, 1) the bordered Jacobian satisfies
//! σ_min(F_x) >= sqrt(1 - τ max{1/α, 1}).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, svd, DenseMatrix};

/// Relative threshold on σ_N for flagging a fold candidate.
pub const FOLD_SIGMA_REL: f64 = 1e-6;
/// Relative threshold on |u_Nᵀ G_λ| for flagging a fold candidate.
pub const FOLD_PROJ_REL: f64 = 1e-6;

/// Outcome of the σ_min(F_x) lower-bound evaluation at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value")]
pub enum SigmaMinBound {
    /// sqrt(1 - τ max{1/α, 1}); only defined when τ < min(α, 1).
    Valid(f64),
    /// The hypothesis failed; the bound is vacuous at this point.
    Vacuous(VacuousReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VacuousReason {
    AlphaVanished,
    TauNotBelowAlpha,
    TauNotBelowOne,
}

impl SigmaMinBound {
    pub fn value(&self) -> Option<f64> {
        match self {
            SigmaMinBound::Valid(v) => Some(*v),
            SigmaMinBound::Vacuous(_) => None,
        }
    }
}

/// Per-point fold diagnostics, all derived from one SVD of G_u.
#[derive(Debug, Clone, Serialize)]
pub struct FoldDiagnostics {
    pub sigma_n: f64,
    /// σ_{N-1}; +∞ sentinel when N = 1.
    pub sigma_n_minus_1: f64,
    /// σ_{N-1}² - σ_N²; +∞ sentinel when N = 1.
    pub gap: f64,
    /// u_Nᵀ G_λ.
    pub proj: f64,
    pub xi: f64,
    pub alpha: f64,
    pub tau: f64,
    /// τ max{1/α, 1}, the bound on ‖E‖ in the splitting D⁻¹F_xF_xᵀ = I + E;
    /// the bound hypothesis is exactly this quantity being below one.
    pub e_norm_bound: f64,
    pub sigma_min_fx_bound: SigmaMinBound,
    /// Smallest singular value of the assembled bordered Jacobian.
    pub sigma_min_fx_actual: f64,
    /// Largest singular value of the assembled bordered Jacobian.
    pub sigma_max_fx: f64,
    pub is_simple_fold_candidate: bool,
}

/// The bordered Jacobian F_x = [[G_u, G_λ], [u̇₀ᵀ, λ̇₀]].
#[derive(Debug, Clone)]
pub struct BorderedJacobian {
    pub g_u: DenseMatrix,
    pub g_lambda: Vec<f64>,
    pub tangent: Vec<f64>,
    pub assembled: DenseMatrix,
}

/// Assembles the bordered Jacobian from its blocks.
///
/// The tangent must be unit length within 1e-10; a drift of up to 1e-6 is
/// renormalized, anything worse is a contract violation.
pub fn assemble_bordered(
    g_u: &DenseMatrix,
    g_lambda: &[f64],
    tangent: &[f64],
) -> Result<BorderedJacobian> {
    let n = g_u.rows();
    if !g_u.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "G_u must be square, got {}x{}",
            g_u.rows(),
            g_u.cols()
        )));
    }
    if g_lambda.len() != n || tangent.len() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected G_λ of length {n} and tangent of length {}, got {} and {}",
            n + 1,
            g_lambda.len(),
            tangent.len()
        )));
    }
    let t_norm = norm(tangent);
    let mut tangent = tangent.to_vec();
    if (t_norm - 1.0).abs() > 1e-10 {
        if (t_norm - 1.0).abs() <= 1e-6 {
            crate::linalg::scale(&mut tangent, 1.0 / t_norm);
        } else {
            return Err(Error::Precondition(format!(
                "tangent norm {t_norm} is outside [1 - 1e-6, 1 + 1e-6]"
            )));
        }
    }
    let assembled = DenseMatrix::from_fn(n + 1, n + 1, |i, j| {
        if i < n {
            if j < n { g_u[(i, j)] } else { g_lambda[i] }
        } else {
            tangent[j]
        }
    });
    Ok(BorderedJacobian { g_u: g_u.clone(), g_lambda: g_lambda.to_vec(), tangent, assembled })
}

/// Smallest singular value of the assembled bordered Jacobian.
pub fn sigma_min_actual(bordered: &BorderedJacobian) -> Result<f64> {
    Ok(svd(&bordered.assembled)?.sigma_min())
}

/// Evaluates sqrt(1 - τ max{1/α, 1}) when the hypothesis τ < min(α, 1)
/// holds, and records which condition failed otherwise.
pub fn sigma_min_bound(alpha: f64, tau: f64) -> SigmaMinBound {
    if alpha <= 0.0 {
        return SigmaMinBound::Vacuous(VacuousReason::AlphaVanished);
    }
    if tau >= 1.0 {
        return SigmaMinBound::Vacuous(VacuousReason::TauNotBelowOne);
    }
    if tau >= alpha {
        return SigmaMinBound::Vacuous(VacuousReason::TauNotBelowAlpha);
    }
    SigmaMinBound::Valid((1.0 - tau * (1.0 / alpha).max(1.0)).sqrt())
}

/// Full fold classification of a path point.
///
/// `tangent` is the (N+1)-vector (u̇₀, λ̇₀) actually used by the predictor,
/// so τ reflects the tangent the continuation runs with, not the exact one.
/// For N = 1 the gap is reported as +∞ and α reduces to max{σ_1², proj²}.
pub fn classify_point(
    g_u: &DenseMatrix,
    g_lambda: &[f64],
    tangent: &[f64],
) -> Result<FoldDiagnostics> {
    let bordered = assemble_bordered(g_u, g_lambda, tangent)?;
    let n = g_u.rows();

    let fact = svd(g_u)?;
    let sigma_n = fact.sigma_min();
    let sigma_1 = fact.sigma_max();
    let u_n = fact.u_min();

    let (sigma_n_minus_1, gap) = if n >= 2 {
        let s = fact.singular_values[n - 2];
        (s, s * s - sigma_n * sigma_n)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };

    let proj = dot(&u_n, &bordered.g_lambda);
    let mut orth = bordered.g_lambda.clone();
    axpy(&mut orth, -proj, &u_n);
    let xi = proj.abs() + norm(&orth);

    let gap_ratio = if gap.is_infinite() {
        1.0
    } else if gap + xi * xi == 0.0 {
        0.0
    } else {
        gap / (gap + xi * xi)
    };
    let alpha = (sigma_n * sigma_n).max(proj * proj * gap_ratio);

    // Tangent residual G_u u̇₀ + G_λ λ̇₀ with the (possibly renormalized)
    // tangent stored in the bordered assembly.
    let mut r = g_u.matvec(&bordered.tangent[..n]);
    axpy(&mut r, bordered.tangent[n], &bordered.g_lambda);
    let tau = norm(&r);

    let e_norm_bound = if alpha > 0.0 { tau * (1.0 / alpha).max(1.0) } else { f64::INFINITY };
    let bound = sigma_min_bound(alpha, tau);

    let fx = svd(&bordered.assembled)?;

    let g_lambda_norm = norm(&bordered.g_lambda);
    let is_simple_fold_candidate =
        sigma_n <= FOLD_SIGMA_REL * sigma_1 && proj.abs() > FOLD_PROJ_REL * g_lambda_norm;

    Ok(FoldDiagnostics {
        sigma_n,
        sigma_n_minus_1,
        gap,
        proj,
        xi,
        alpha,
        tau,
        e_norm_bound,
        sigma_min_fx_bound: bound,
        sigma_min_fx_actual: fx.sigma_min(),
        sigma_max_fx: fx.sigma_max(),
        is_simple_fold_candidate,
    })
}

/// Largest arclength step guaranteed safe by the Newton-Kantorovich
/// argument: 1 / (2 γ_x γ_F ‖F_x⁻¹‖).
pub fn max_step_bound(gamma_x: f64, gamma_f: f64, inv_norm: f64) -> Result<f64> {
    if gamma_x <= 0.0 || gamma_f <= 0.0 || inv_norm <= 0.0 {
        return Err(Error::Precondition(format!(
            "max_step_bound requires positive inputs, got ({gamma_x}, {gamma_f}, {inv_norm})"
        )));
    }
    Ok(1.0 / (2.0 * gamma_x * gamma_f * inv_norm))
}
