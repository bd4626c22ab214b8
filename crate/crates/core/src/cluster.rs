//! Identity-plus-low-rank splittings of Jacobians and the GMRES residual
//! envelope they predict.
//!
//! A Jacobian J = I + K + E with rank(K) = p and ‖E‖ small makes GMRES
//! spend about p + 1 iterations on the outlying eigenvalues and then
//! converge geometrically:
//!
//!   ‖r_{p̂+k}‖ <= C ‖E‖ᵏ ‖r₀‖.
//!
//! Bordering the system with (G_λ, tangent) raises the low-rank term to at
//! most p + 2, so pseudo-arclength continuation inherits the clustering of
//! the underlying problem.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fold::assemble_bordered;
use crate::gmres::{gmres_solve, GmresTrace, LinearOperator};
use crate::linalg::{svd, DenseMatrix};

/// Summary of one splitting, serializable for the experiment reports.
#[derive(Debug, Clone, Serialize)]
pub struct SplittingReport {
    /// Number of singular values of J - I above the outlier threshold.
    pub p: usize,
    /// σ_{p+1}(J - I): the norm of the remainder by construction.
    pub e_norm: f64,
    /// The p retained singular values.
    pub k_singular_values: Vec<f64>,
    /// p + 2, the rank budget after bordering.
    pub bordered_rank_bound: usize,
    /// Iterations GMRES spent above one envelope factor ‖E‖ ‖r₀‖;
    /// filled by the envelope verification.
    pub observed_gmres_plateau: Option<usize>,
    /// Fitted envelope constant; filled by the envelope verification.
    pub jbound_c_fit: Option<f64>,
}

/// A computed splitting J = I + K + E with the matrices on hand.
#[derive(Debug, Clone)]
pub struct LowRankSplit {
    pub k: DenseMatrix,
    pub e: DenseMatrix,
    pub report: SplittingReport,
}

/// Splits a square J as I + K + E by truncating the SVD of J - I.
///
/// `eps` is relative to σ₁(J - I): p counts the singular values above
/// eps σ₁, K is the rank-p truncation and E the remainder, so
/// ‖E‖ = σ_{p+1} exactly (zero when p exhausts the spectrum).
pub fn split_low_rank(j: &DenseMatrix, eps: f64) -> Result<LowRankSplit> {
    if !j.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "splitting requires a square matrix, got {}x{}",
            j.rows(),
            j.cols()
        )));
    }
    let n = j.rows();
    let d = j.sub(&DenseMatrix::identity(n));
    let fact = svd(&d)?;
    let sigma_1 = fact.sigma_max();
    let threshold = eps * sigma_1;
    let p = fact.singular_values.iter().take_while(|&&s| s > threshold).count();

    let mut k = DenseMatrix::zeros(n, n);
    for l in 0..p {
        let s = fact.singular_values[l];
        for i in 0..n {
            let ui = fact.u[(i, l)] * s;
            for jj in 0..n {
                k[(i, jj)] += ui * fact.v[(jj, l)];
            }
        }
    }
    let e = d.sub(&k);
    let e_norm = if p < n { fact.singular_values[p] } else { 0.0 };

    Ok(LowRankSplit {
        k,
        e,
        report: SplittingReport {
            p,
            e_norm,
            k_singular_values: fact.singular_values[..p].to_vec(),
            bordered_rank_bound: p + 2,
            observed_gmres_plateau: None,
            jbound_c_fit: None,
        },
    })
}

/// The bordered splitting F_x = I + 𝒦 + diag(E, 0).
#[derive(Debug, Clone)]
pub struct BorderedSplit {
    /// 𝒦 = [[K, G_λ], [u̇ᵀ, λ̇ - 1]], rank at most p + 2.
    pub kk: DenseMatrix,
    /// Numeric rank of 𝒦 at a 1e-10 relative threshold.
    pub kk_numeric_rank: usize,
    /// max |(F_x - I - 𝒦) - diag(E, 0)|; zero by construction.
    pub embed_defect: f64,
    pub report: SplittingReport,
}

/// Splits the bordered Jacobian built from (J, G_λ, tangent) around the
/// identity.
///
/// With J = I + K + E from [`split_low_rank`], the bordered matrix
/// satisfies F_x - I - 𝒦 = diag(E, 0) exactly, so ‖F_x - I - 𝒦‖ = ‖E‖,
/// and rank(𝒦) <= p + 2 since its range is spanned by Range(K), (G_λ; 0)
/// and the bottom row's unit coordinate.
pub fn bordered_splitting(
    j: &DenseMatrix,
    g_lambda: &[f64],
    tangent: &[f64],
    eps: f64,
) -> Result<BorderedSplit> {
    let split = split_low_rank(j, eps)?;
    assemble_and_verify(j, g_lambda, tangent, &split.k, &split.e, split.report)
}

/// Bordered splitting from a known decomposition J = I + K + E (e.g. a
/// planted one), bypassing the SVD estimation. p and ‖E‖ are read off the
/// given parts.
pub fn bordered_splitting_with_parts(
    j: &DenseMatrix,
    k: &DenseMatrix,
    e: &DenseMatrix,
    g_lambda: &[f64],
    tangent: &[f64],
) -> Result<BorderedSplit> {
    let k_svd = svd(k)?;
    let rank_tol = 1e-10 * k_svd.sigma_max();
    let p = k_svd.singular_values.iter().take_while(|&&s| s > rank_tol).count();
    let e_norm = svd(e)?.sigma_max();
    let report = SplittingReport {
        p,
        e_norm,
        k_singular_values: k_svd.singular_values[..p].to_vec(),
        bordered_rank_bound: p + 2,
        observed_gmres_plateau: None,
        jbound_c_fit: None,
    };
    assemble_and_verify(j, g_lambda, tangent, k, e, report)
}

fn assemble_and_verify(
    j: &DenseMatrix,
    g_lambda: &[f64],
    tangent: &[f64],
    k: &DenseMatrix,
    e: &DenseMatrix,
    report: SplittingReport,
) -> Result<BorderedSplit> {
    let bordered = assemble_bordered(j, g_lambda, tangent)?;
    let n = j.rows();

    let kk = DenseMatrix::from_fn(n + 1, n + 1, |i, jj| {
        if i < n {
            if jj < n { k[(i, jj)] } else { bordered.g_lambda[i] }
        } else if jj < n {
            bordered.tangent[jj]
        } else {
            bordered.tangent[n] - 1.0
        }
    });

    // Numeric rank of 𝒦.
    let kk_svd = svd(&kk)?;
    let rank_tol = 1e-10 * kk_svd.sigma_max();
    let kk_numeric_rank =
        kk_svd.singular_values.iter().take_while(|&&s| s > rank_tol).count();

    // F_x - I - 𝒦 embeds E and nothing else. When E came out of
    // split_low_rank the subtraction chains are identical and the defect
    // is exactly zero; planted parts cancel to rounding level.
    let fx = &bordered.assembled;
    let mut embed_defect = 0.0f64;
    for i in 0..=n {
        for jj in 0..=n {
            let identity = if i == jj { 1.0 } else { 0.0 };
            let residual = fx[(i, jj)] - identity - kk[(i, jj)];
            let expected = if i < n && jj < n { e[(i, jj)] } else { 0.0 };
            embed_defect = embed_defect.max((residual - expected).abs());
        }
    }

    Ok(BorderedSplit { kk, kk_numeric_rank, embed_defect, report })
}

/// Result of checking the residual envelope on one operator.
#[derive(Debug, Clone, Serialize)]
pub struct JboundReport {
    pub p_hat: usize,
    pub e_norm: f64,
    /// Smallest C with ‖r_{p̂+k}‖ <= C ‖E‖ᵏ ‖r₀‖ along the whole trace.
    pub c_fit: f64,
    pub holds: bool,
    pub observed_plateau: usize,
    pub residual_norms: Vec<f64>,
}

/// Runs GMRES to near machine tolerance and fits the smallest C such that
/// ‖r_{p̂+k}‖ <= C ‖E‖ᵏ ‖r₀‖ for every recorded k >= 0.
///
/// Requires e_norm < 1 (the envelope is vacuous otherwise) and a trace at
/// least p̂ iterations long. Zero e_norm is floored at machine scale so the
/// fit stays finite on exactly-low-rank operators.
pub fn verify_jbound(
    op: &dyn LinearOperator,
    p_hat: usize,
    e_norm: f64,
    b: &[f64],
) -> Result<JboundReport> {
    if !(0.0..1.0).contains(&e_norm) {
        return Err(Error::Precondition(format!(
            "the envelope needs ‖E‖ in [0, 1), got {e_norm}"
        )));
    }
    let n = op.dimension();
    let trace = gmres_solve(op, b, &vec![0.0; n], 1e-14, n)?;
    finish_jbound(&trace, p_hat, e_norm)
}

/// Envelope fit against an existing trace (used when the solve already ran,
/// e.g. the inner iterations of a continuation step).
pub fn fit_jbound(trace: &GmresTrace, p_hat: usize, e_norm: f64) -> Result<JboundReport> {
    if !(0.0..1.0).contains(&e_norm) {
        return Err(Error::Precondition(format!(
            "the envelope needs ‖E‖ in [0, 1), got {e_norm}"
        )));
    }
    finish_jbound(trace, p_hat, e_norm)
}

fn finish_jbound(trace: &GmresTrace, p_hat: usize, e_norm: f64) -> Result<JboundReport> {
    let iterations = trace.iterations;
    if iterations < p_hat {
        return Err(Error::InsufficientData { needed: p_hat, available: iterations });
    }
    let r0 = trace.residual_norms[0];
    if r0 == 0.0 {
        return Ok(JboundReport {
            p_hat,
            e_norm,
            c_fit: 0.0,
            holds: true,
            observed_plateau: 0,
            residual_norms: trace.residual_norms.clone(),
        });
    }
    let rate = e_norm.max(1e-14);
    let mut c_fit = 0.0f64;
    let mut envelope = r0;
    for k in 0..=(iterations - p_hat) {
        let r = trace.residual_norms[p_hat + k];
        c_fit = c_fit.max(r / envelope);
        envelope *= rate;
    }
    let observed_plateau = trace
        .residual_norms
        .iter()
        .position(|&r| r <= rate * r0)
        .unwrap_or(iterations);
    Ok(JboundReport {
        p_hat,
        e_norm,
        c_fit,
        holds: c_fit.is_finite(),
        observed_plateau,
        residual_norms: trace.residual_norms.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmres::DenseOperator;
    use crate::linalg::normalize;
    use crate::problems::synthetic_cluster_operator;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_splits_trivially() {
        let split = split_low_rank(&DenseMatrix::identity(6), 1e-3).unwrap();
        assert_eq!(split.report.p, 0);
        assert_eq!(split.report.e_norm, 0.0);
        assert_eq!(split.report.bordered_rank_bound, 2);
    }

    #[test]
    fn exact_rank_one_update_detected() {
        let n = 8;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0) / n as f64).collect();
        let y: Vec<f64> = (0..n).map(|i| 1.0 - (i as f64) / n as f64).collect();
        let j = DenseMatrix::from_fn(n, n, |i, jj| {
            (if i == jj { 1.0 } else { 0.0 }) + x[i] * y[jj]
        });
        let split = split_low_rank(&j, 1e-3).unwrap();
        assert_eq!(split.report.p, 1);
        assert!(split.report.e_norm <= 1e-12);
    }

    #[test]
    fn heq_jacobian_has_compact_tail() {
        // The discrete integral-operator Jacobian is identity plus a
        // rapidly decaying compact part: few outliers at eps = 1e-3.
        let problem = crate::problems::HeqProblem::new(80);
        let h = vec![1.2; 80];
        let j = problem.discretization().jacobian(&h, 0.5).unwrap();
        let split = split_low_rank(&j, 1e-3).unwrap();
        assert!(split.report.p <= 6, "p = {}", split.report.p);
        assert!(split.report.e_norm <= 1e-3 * 1.0 + 1e-12);
    }

    #[test]
    fn bordered_splitting_trivial_case() {
        let n = 5;
        let j = DenseMatrix::identity(n);
        let mut g_lambda = vec![0.0; n];
        g_lambda[0] = 1.0;
        let mut tangent = vec![0.0; n + 1];
        tangent[n] = 1.0;
        let b = bordered_splitting(&j, &g_lambda, &tangent, 1e-3).unwrap();
        assert!(b.kk_numeric_rank <= 2, "rank {}", b.kk_numeric_rank);
        assert_eq!(b.embed_defect, 0.0);
    }

    #[test]
    fn bordered_splitting_planted_rank_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let op = synthetic_cluster_operator(20, 2, 1e-4, 9).unwrap();
        let g_lambda: Vec<f64> = (0..20).map(|_| rng.gen::<f64>() - 0.5).collect();
        let mut tangent: Vec<f64> = (0..21).map(|_| rng.gen::<f64>() - 0.5).collect();
        normalize(&mut tangent).unwrap();
        // Estimation flavor: the threshold separates the planted weights
        // (>= 0.5) from the remainder, the defect is exactly zero, and the
        // recovered remainder is at most the planted ‖E‖.
        let b = bordered_splitting(op.matrix(), &g_lambda, &tangent, 1e-3).unwrap();
        assert_eq!(b.report.p, 2);
        assert!(b.kk_numeric_rank <= 4, "rank {}", b.kk_numeric_rank);
        assert_eq!(b.embed_defect, 0.0);
        assert!(b.report.e_norm <= 1e-4 + 1e-12);

        // Planted flavor: exact p and ‖E‖, defect at rounding level.
        let bp = bordered_splitting_with_parts(
            op.matrix(),
            op.k(),
            op.e(),
            &g_lambda,
            &tangent,
        )
        .unwrap();
        assert_eq!(bp.report.p, 2);
        assert!(bp.kk_numeric_rank <= 4);
        assert!(bp.embed_defect <= 1e-13, "defect {}", bp.embed_defect);
        assert!((bp.report.e_norm - 1e-4).abs() <= 1e-9);
    }

    #[test]
    fn jbound_identity_trivial() {
        let a = DenseMatrix::identity(10);
        let op = DenseOperator::new(&a);
        let b = vec![1.0; 10];
        let r = verify_jbound(&op, 0, 0.0, &b).unwrap();
        assert!(r.holds);
        assert!(r.c_fit <= 1.0 + 1e-12, "C = {}", r.c_fit);
        // One iteration kills the residual entirely.
        assert!(r.residual_norms[1] <= 1e-12 * r.residual_norms[0]);
    }

    #[test]
    fn jbound_synthetic_moderate_constant() {
        let op = synthetic_cluster_operator(60, 3, 1e-2, 13).unwrap();
        let b: Vec<f64> = (0..60).map(|i| ((i * i) as f64).cos()).collect();
        let r = verify_jbound(&op, 4, op.e_norm(), &b).unwrap();
        assert!(r.holds);
        assert!(r.c_fit <= 1e3, "C = {}", r.c_fit);
        assert!(r.observed_plateau <= 5, "plateau {}", r.observed_plateau);
    }

    #[test]
    fn jbound_insufficient_trace_is_error() {
        let a = DenseMatrix::identity(4);
        let op = DenseOperator::new(&a);
        // Identity converges in one iteration; p_hat = 3 cannot be checked.
        let err = verify_jbound(&op, 3, 0.5, &[1.0; 4]).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { .. }));
    }

    #[test]
    fn jbound_rejects_large_e() {
        let a = DenseMatrix::identity(4);
        let op = DenseOperator::new(&a);
        assert!(verify_jbound(&op, 0, 1.0, &[1.0; 4]).is_err());
    }
}
