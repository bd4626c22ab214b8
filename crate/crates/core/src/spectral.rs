//! Lower bounds for the smallest eigenvalue of a symmetric positive
//! semi-definite matrix under a rank-one update A + y yᵀ.
//!
//! The bound sharpens the Weyl interval β_N <= λ_min(A + yyᵀ) <= β_{N-1}
//! by accounting for how much of y lies along the eigenvector of β_N:
//!
//!   λ_min(A + yyᵀ) >= max{ β_N,  y_N² gap / (gap + ξ²) }
//!
//! with y_N = u_Nᵀ y, gap = β_{N-1} - β_N, ξ = |y_N| + sqrt(‖y‖² - y_N²).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sym_eig, DenseMatrix};

/// Everything the rank-one bound evaluation produces for one (A, y) pair.
#[derive(Debug, Clone, Serialize)]
pub struct RankOneBoundReport {
    pub beta_n: f64,
    pub beta_n_minus_1: f64,
    /// u_Nᵀ y, the component of y along the bottom eigenvector.
    pub y_n: f64,
    pub gap: f64,
    pub xi: f64,
    /// max{β_N, y_N² gap/(gap+ξ²)}.
    pub bound_main: f64,
    /// min{β_N + y_N² gap/(gap+ξ²), β_{N-1} y_N²/ξ²}.
    pub bound_helper: f64,
    pub weyl_low: f64,
    pub weyl_high: f64,
    /// Set when gap < 1e-12 ‖A‖: β_N is (numerically) repeated, the
    /// eigenvector choice is arbitrary and the gap term degrades to the
    /// Weyl floor.
    pub degenerate_gap: bool,
}

struct Prepared {
    beta_n: f64,
    beta_n_minus_1: f64,
    y_n: f64,
    gap: f64,
    xi: f64,
    /// gap/(gap+ξ²), with the +∞ gap of the N = 1 case collapsing to 1.
    gap_ratio: f64,
    degenerate_gap: bool,
}

fn prepare(a: &DenseMatrix, y: &[f64]) -> Result<Prepared> {
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "update vector has length {}, matrix order is {}",
            y.len(),
            a.rows()
        )));
    }
    let y_norm = norm(y);
    if y_norm == 0.0 {
        return Err(Error::Precondition("update vector y must be nonzero".into()));
    }
    let eig = sym_eig(a)?;
    let n = a.rows();
    let norm_a = eig.eigenvalues[0].abs().max(eig.eigenvalues[n - 1].abs());
    if eig.eigenvalues[n - 1] < -1e-10 * norm_a {
        return Err(Error::Precondition(format!(
            "matrix is not positive semi-definite: smallest eigenvalue {:.3e}",
            eig.eigenvalues[n - 1]
        )));
    }
    // Eigenvalues within the PSD tolerance are clamped to zero before the
    // bound is formed; A arrives as a floating-point product in practice.
    let beta_n = eig.eigenvalues[n - 1].max(0.0);
    let (beta_n_minus_1, gap, degenerate_gap) = if n >= 2 {
        let b = eig.eigenvalues[n - 2].max(0.0);
        (b, b - beta_n, (b - beta_n) < 1e-12 * norm_a)
    } else {
        (f64::INFINITY, f64::INFINITY, false)
    };
    let u_n = eig.vector_min();
    let y_n = dot(&u_n, y);
    let xi = y_n.abs() + (y_norm * y_norm - y_n * y_n).max(0.0).sqrt();
    let gap_ratio = if gap.is_infinite() {
        1.0
    } else if gap + xi * xi == 0.0 {
        0.0
    } else {
        gap / (gap + xi * xi)
    };
    Ok(Prepared { beta_n, beta_n_minus_1, y_n, gap, xi, gap_ratio, degenerate_gap })
}

/// Evaluates the rank-one lower bound for λ_min(A + yyᵀ).
///
/// `a` must be symmetric positive semi-definite within tolerance and `y`
/// nonzero. For a repeated smallest eigenvalue the eigensolver's last
/// column stands in for u_N; the bound holds for that choice and the
/// report flags the degeneracy.
pub fn rank_one_lower_bound(a: &DenseMatrix, y: &[f64]) -> Result<RankOneBoundReport> {
    let p = prepare(a, y)?;
    let gap_term = p.y_n * p.y_n * p.gap_ratio;
    let bound_main = p.beta_n.max(gap_term);
    let bound_helper = helper_from_prepared(&p);
    Ok(RankOneBoundReport {
        beta_n: p.beta_n,
        beta_n_minus_1: p.beta_n_minus_1,
        y_n: p.y_n,
        gap: p.gap,
        xi: p.xi,
        bound_main,
        bound_helper,
        weyl_low: p.beta_n,
        weyl_high: p.beta_n_minus_1,
        degenerate_gap: p.degenerate_gap,
    })
}

fn helper_from_prepared(p: &Prepared) -> f64 {
    let first = p.beta_n + p.y_n * p.y_n * p.gap_ratio;
    let second = if p.beta_n_minus_1.is_infinite() {
        f64::INFINITY
    } else {
        p.beta_n_minus_1 * p.y_n * p.y_n / (p.xi * p.xi)
    };
    first.min(second)
}

/// The intermediate bound min{β_N + y_N² gap/(gap+ξ²), β_{N-1} y_N²/ξ²}.
///
/// Requires ξ > 0, which holds whenever y is nonzero.
pub fn rank_one_helper_bound(a: &DenseMatrix, y: &[f64]) -> Result<f64> {
    let p = prepare(a, y)?;
    Ok(helper_from_prepared(&p))
}

/// The Weyl interval (β_N, β_{N-1}) bracketing λ_min(A + yyᵀ).
///
/// For N = 1 there is no β_{N-1}; the upper end is reported as +∞.
pub fn weyl_interval(a: &DenseMatrix, _y: &[f64]) -> Result<(f64, f64)> {
    let eig = sym_eig(a)?;
    let n = a.rows();
    let low = eig.eigenvalues[n - 1];
    let high = if n >= 2 { eig.eigenvalues[n - 2] } else { f64::INFINITY };
    Ok((low, high))
}

/// Oracle used by the tests and the fuzz suite: λ_min(A + yyᵀ) by dense
/// eigendecomposition of the explicitly formed update.
pub fn lambda_min_oracle(a: &DenseMatrix, y: &[f64]) -> Result<f64> {
    let n = a.rows();
    let updated = DenseMatrix::from_fn(n, n, |i, j| a[(i, j)] + y[i] * y[j]);
    Ok(sym_eig(&updated)?.min())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn diag(entries: &[f64]) -> DenseMatrix {
        let n = entries.len();
        DenseMatrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { 0.0 })
    }

    #[test]
    fn closed_form_two_by_two() {
        // A = diag(1,0), y = (0,t): bound = t²/(1+t²), true λ_min = min(t²,1).
        for &t in &[0.25, 0.5, 1.0, 2.0] {
            let a = diag(&[1.0, 0.0]);
            let y = [0.0, t];
            let r = rank_one_lower_bound(&a, &y).unwrap();
            assert!((r.gap - 1.0).abs() < 1e-14);
            assert!((r.xi - t).abs() < 1e-12);
            let expected = t * t / (1.0 + t * t);
            assert!((r.bound_main - expected).abs() < 1e-12);
            let truth = (t * t).min(1.0);
            assert!(r.bound_main <= truth + 1e-12);
        }
    }

    #[test]
    fn orthogonal_update_hits_weyl_floor() {
        // y orthogonal to u_N: the gap term vanishes and bound = β_N.
        let a = diag(&[3.0, 2.0, 0.5]);
        let y = [1.0, 1.0, 0.0];
        let r = rank_one_lower_bound(&a, &y).unwrap();
        assert!(r.y_n.abs() < 1e-12);
        assert!((r.bound_main - 0.5).abs() < 1e-12);
        assert_eq!(r.bound_main, r.weyl_low.max(r.bound_main));
    }

    #[test]
    fn aligned_update_equality() {
        // y = c u_N: λ_min(A+yyᵀ) = min{β_N + ‖y‖², β_{N-1}} exactly.
        let a = diag(&[4.0, 1.5, 0.25]);
        for &c in &[0.3, 1.0, 2.5] {
            let y = [0.0, 0.0, c];
            let truth = lambda_min_oracle(&a, &y).unwrap();
            let expected = (0.25 + c * c).min(1.5);
            assert!(
                (truth - expected).abs() <= 1e-10 * expected.abs().max(1.0),
                "aligned equality failed: {truth} vs {expected}"
            );
        }
    }

    #[test]
    fn helper_bound_closed_form() {
        let a = diag(&[1.0, 0.0]);
        let h = rank_one_helper_bound(&a, &[0.0, 1.0]).unwrap();
        assert!((h - 0.5).abs() < 1e-12);
        let truth = lambda_min_oracle(&a, &[0.0, 1.0]).unwrap();
        assert!((truth - 1.0).abs() < 1e-12);
        assert!(h <= truth);
    }

    #[test]
    fn helper_bound_degenerate_gap() {
        // Zero matrix: gap = 0, both branches collapse to 0.
        let a = diag(&[0.0, 0.0]);
        let h = rank_one_helper_bound(&a, &[1.0, 0.0]).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn helper_bound_below_oracle_on_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let b = DenseMatrix::from_fn(4, 4, |_, _| rng.gen::<f64>() - 0.5);
            let a = b.times_transpose();
            let y: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let h = rank_one_helper_bound(&a, &y).unwrap();
            let truth = lambda_min_oracle(&a, &y).unwrap();
            assert!(h <= truth + 1e-10 * truth.abs().max(1.0));
        }
    }

    #[test]
    fn weyl_interval_examples() {
        let a = diag(&[3.0, 1.0]);
        assert_eq!(weyl_interval(&a, &[1.0, 1.0]).unwrap(), (1.0, 3.0));

        let i2 = DenseMatrix::identity(2);
        let (lo, hi) = weyl_interval(&i2, &[1.0, 0.0]).unwrap();
        assert_eq!((lo, hi), (1.0, 1.0));
        let truth = lambda_min_oracle(&i2, &[1.0, 0.0]).unwrap();
        assert!((truth - 1.0).abs() < 1e-12);

        let a1 = diag(&[2.0]);
        let (lo, hi) = weyl_interval(&a1, &[1.0]).unwrap();
        assert_eq!(lo, 2.0);
        assert!(hi.is_infinite());
    }

    #[test]
    fn zero_update_rejected() {
        let a = DenseMatrix::identity(2);
        assert!(matches!(
            rank_one_lower_bound(&a, &[0.0, 0.0]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let a = diag(&[1.0, -0.5]);
        assert!(matches!(
            rank_one_lower_bound(&a, &[1.0, 0.0]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn alignment_monotonicity_of_formula() {
        // Fixed ‖y‖: increasing |y_N| never decreases the bound value.
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..200 {
            let gap = rng.gen::<f64>() * 3.0;
            let beta_n = rng.gen::<f64>();
            let r = rng.gen::<f64>() * 2.0 + 0.1; // ‖y‖
            let formula = |t: f64| {
                let xi = t + (r * r - t * t).max(0.0).sqrt();
                beta_n.max(t * t * gap / (gap + xi * xi))
            };
            let t1 = rng.gen::<f64>() * r;
            let t2 = (t1 + rng.gen::<f64>() * (r - t1)).min(r);
            assert!(
                formula(t2) >= formula(t1) - 1e-12,
                "monotonicity failed: f({t1})={} f({t2})={}",
                formula(t1),
                formula(t2)
            );
        }
    }

    #[test]
    fn scale_covariance_of_formula() {
        // Scaling A by t and y by sqrt(t) scales bound_main by t.
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..50 {
            let b = DenseMatrix::from_fn(5, 5, |_, _| rng.gen::<f64>() - 0.5);
            let a = b.times_transpose();
            let y: Vec<f64> = (0..5).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let t = rng.gen::<f64>() * 9.0 + 0.5;
            let r1 = rank_one_lower_bound(&a, &y).unwrap();
            let ys: Vec<f64> = y.iter().map(|v| v * t.sqrt()).collect();
            let r2 = rank_one_lower_bound(&a.scaled(t), &ys).unwrap();
            let scale_ref = r2.bound_main.abs().max(1e-12);
            assert!(
                (r2.bound_main - t * r1.bound_main).abs() <= 1e-9 * scale_ref,
                "covariance failed: {} vs {}",
                r2.bound_main,
                t * r1.bound_main
            );
        }
    }
}
