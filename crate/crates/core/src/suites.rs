//! Seeded property suites: rank-one bound fuzzing, splitting and envelope
//! verification, and the closed-form toy-fold comparison.
//!
//! Trials are independent, each drawing from its own RNG stream derived
//! from the base seed, so runs are deterministic regardless of thread
//! count and the trial loops parallelize cleanly.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::continuation::{initial_tangent, psarc, PsarcConfig};
use crate::error::Result;
use crate::linalg::{norm, normalize, DenseMatrix};
use crate::par;
use crate::problems::{synthetic_cluster_operator, toy_fold_problem};
use crate::spectral::{lambda_min_oracle, rank_one_helper_bound, rank_one_lower_bound};

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Outcome of the rank-one bound fuzz suite.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsFuzzReport {
    pub trials: usize,
    pub max_dimension: usize,
    pub seed: u64,
    pub violations: Vec<String>,
    /// Tightest observed oracle-minus-bound slack, for the record.
    pub min_slack: f64,
}

impl BoundsFuzzReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

fn bounds_fuzz_trial(seed: u64, trial: usize, max_dimension: usize) -> (Option<String>, f64) {
    let mut rng = trial_rng(seed, trial as u64);
    let n = rng.gen_range(2..=max_dimension);
    let b = DenseMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
    let a = b.times_transpose();
    let mut y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    if norm(&y) < 1e-8 {
        y[0] = 1.0;
    }

    let mut check = || -> Result<(Option<String>, f64)> {
        let report = rank_one_lower_bound(&a, &y)?;
        let oracle = lambda_min_oracle(&a, &y)?;
        let scale = report.beta_n.abs().max(report.beta_n_minus_1.abs())
            + y.iter().map(|v| v * v).sum::<f64>();
        let tol = 1e-9 * scale;
        let slack = oracle - report.bound_main;

        if report.bound_main > oracle + tol {
            return Ok((
                Some(format!(
                    "trial {trial}: bound {:.6e} above oracle {:.6e} (n = {n})",
                    report.bound_main, oracle
                )),
                slack,
            ));
        }
        if oracle < report.weyl_low - tol || oracle > report.weyl_high + tol {
            return Ok((
                Some(format!(
                    "trial {trial}: oracle {:.6e} outside Weyl interval [{:.6e}, {:.6e}]",
                    oracle, report.weyl_low, report.weyl_high
                )),
                slack,
            ));
        }
        let helper = rank_one_helper_bound(&a, &y)?;
        if helper > oracle + tol {
            return Ok((
                Some(format!(
                    "trial {trial}: helper bound {helper:.6e} above oracle {oracle:.6e}"
                )),
                slack,
            ));
        }

        // Aligned case: exact equality λ_min(A + c² u_N u_Nᵀ)
        //             = min(β_N + c², β_{N-1}).
        let eig = crate::linalg::sym_eig(&a)?;
        let u_n = eig.vector_min();
        let c = 0.1 + 1.9 * rng.gen::<f64>();
        let y_aligned: Vec<f64> = u_n.iter().map(|v| c * v).collect();
        let aligned_oracle = lambda_min_oracle(&a, &y_aligned)?;
        let beta_n = eig.eigenvalues[n - 1];
        let beta_n1 = eig.eigenvalues[n - 2];
        let expected = (beta_n + c * c).min(beta_n1);
        if (aligned_oracle - expected).abs() > 1e-10 * expected.abs().max(1.0) {
            return Ok((
                Some(format!(
                    "trial {trial}: aligned equality failed: {aligned_oracle:.12e} vs {expected:.12e}"
                )),
                slack,
            ));
        }
        Ok((None, slack))
    };

    match check() {
        Ok(outcome) => outcome,
        Err(e) => (Some(format!("trial {trial}: error {e}")), f64::INFINITY),
    }
}

/// Fuzzes the rank-one lower bound, the Weyl interval, the helper bound and
/// the aligned-case equality against a dense eigensolve oracle.
pub fn run_bounds_fuzz(trials: usize, max_dimension: usize, seed: u64) -> BoundsFuzzReport {
    let outcomes = par::map_indexed(trials, |t| bounds_fuzz_trial(seed, t, max_dimension));
    collect_bounds_report(trials, max_dimension, seed, outcomes)
}

/// Sequential twin of [`run_bounds_fuzz`] for the benches.
pub fn run_bounds_fuzz_seq(trials: usize, max_dimension: usize, seed: u64) -> BoundsFuzzReport {
    let outcomes = par::map_indexed_seq(trials, |t| bounds_fuzz_trial(seed, t, max_dimension));
    collect_bounds_report(trials, max_dimension, seed, outcomes)
}

fn collect_bounds_report(
    trials: usize,
    max_dimension: usize,
    seed: u64,
    outcomes: Vec<(Option<String>, f64)>,
) -> BoundsFuzzReport {
    let mut violations = Vec::new();
    let mut min_slack = f64::INFINITY;
    for (v, slack) in outcomes {
        if let Some(v) = v {
            violations.push(v);
        }
        if slack < min_slack {
            min_slack = slack;
        }
    }
    BoundsFuzzReport { trials, max_dimension, seed, violations, min_slack }
}

/// Outcome of the splitting / envelope verification suite.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterVerifyReport {
    pub trials: usize,
    pub dimension: usize,
    pub seed: u64,
    pub violations: Vec<String>,
    pub max_c_fit: f64,
}

impl ClusterVerifyReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For `trials` random planted splittings (rank p <= max_p): checks the
/// bordered rank bound p + 2, the exact embedding ‖F_x - I - 𝒦‖ = ‖E‖,
/// and the GMRES envelope with p̂ = p + 1 and C <= c_max.
pub fn run_cluster_verify(
    trials: usize,
    dimension: usize,
    max_p: usize,
    eps: f64,
    c_max: f64,
    seed: u64,
) -> ClusterVerifyReport {
    let outcomes = par::map_indexed(trials, |t| {
        cluster_verify_trial(seed, t, dimension, max_p, eps, c_max)
    });
    collect_cluster_report(trials, dimension, seed, outcomes)
}

/// Sequential twin of [`run_cluster_verify`] for the benches.
pub fn run_cluster_verify_seq(
    trials: usize,
    dimension: usize,
    max_p: usize,
    eps: f64,
    c_max: f64,
    seed: u64,
) -> ClusterVerifyReport {
    let outcomes = par::map_indexed_seq(trials, |t| {
        cluster_verify_trial(seed, t, dimension, max_p, eps, c_max)
    });
    collect_cluster_report(trials, dimension, seed, outcomes)
}

fn cluster_verify_trial(
    seed: u64,
    trial: usize,
    dimension: usize,
    max_p: usize,
    eps: f64,
    c_max: f64,
) -> (Option<String>, f64) {
    let mut rng = trial_rng(seed, 1_000_000 + trial as u64);
    let p = rng.gen_range(0..=max_p);
    let op_seed = rng.gen::<u64>();

    let mut run = || -> Result<(Option<String>, f64)> {
        let op = synthetic_cluster_operator(dimension, p, eps, op_seed)?;
        let g_lambda: Vec<f64> =
            (0..dimension).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let mut tangent: Vec<f64> =
            (0..dimension + 1).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        normalize(&mut tangent)?;

        // Verify the planted splitting through the bordered construction.
        let split = crate::cluster::bordered_splitting_with_parts(
            op.matrix(),
            op.k(),
            op.e(),
            &g_lambda,
            &tangent,
        )?;
        if split.report.p != p {
            return Ok((
                Some(format!(
                    "trial {trial}: planted rank read back as {} instead of {p}",
                    split.report.p
                )),
                0.0,
            ));
        }
        if split.kk_numeric_rank > p + 2 {
            return Ok((
                Some(format!(
                    "trial {trial}: rank(𝒦) = {} exceeds p + 2 = {}",
                    split.kk_numeric_rank,
                    p + 2
                )),
                0.0,
            ));
        }
        if split.embed_defect > 1e-13 {
            return Ok((
                Some(format!(
                    "trial {trial}: ‖F_x - I - 𝒦‖ strays from ‖E‖ (defect {:.3e})",
                    split.embed_defect
                )),
                0.0,
            ));
        }
        // The SVD estimation flavor must agree for p >= 1, where the
        // threshold separates the planted weights from the remainder; its
        // embedding cancels bitwise.
        if p >= 1 {
            let est = crate::cluster::bordered_splitting(
                op.matrix(),
                &g_lambda,
                &tangent,
                (eps * 10.0).min(0.1),
            )?;
            if est.report.p != p || est.embed_defect != 0.0 {
                return Ok((
                    Some(format!(
                        "trial {trial}: estimated splitting recovered p = {} (defect {:.3e})",
                        est.report.p, est.embed_defect
                    )),
                    0.0,
                ));
            }
        }

        let b: Vec<f64> = (0..dimension).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let envelope = crate::cluster::verify_jbound(&op, p + 1, op.e_norm(), &b)?;
        if !envelope.holds || envelope.c_fit > c_max {
            return Ok((
                Some(format!(
                    "trial {trial}: envelope fit C = {:.3e} (limit {c_max})",
                    envelope.c_fit
                )),
                envelope.c_fit,
            ));
        }
        Ok((None, envelope.c_fit))
    };

    match run() {
        Ok(outcome) => outcome,
        Err(e) => (Some(format!("trial {trial}: error {e}")), f64::INFINITY),
    }
}

fn collect_cluster_report(
    trials: usize,
    dimension: usize,
    seed: u64,
    outcomes: Vec<(Option<String>, f64)>,
) -> ClusterVerifyReport {
    let mut violations = Vec::new();
    let mut max_c_fit = 0.0f64;
    for (v, c) in outcomes {
        if let Some(v) = v {
            violations.push(v);
        }
        if c > max_c_fit {
            max_c_fit = c;
        }
    }
    ClusterVerifyReport { trials, dimension, seed, violations, max_c_fit }
}

/// Outcome of the toy-fold closed-form comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ToyFoldReport {
    pub ds: f64,
    pub points: usize,
    pub max_lambda: f64,
    pub max_path_gap: f64,
    pub violations: Vec<String>,
}

impl ToyFoldReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Traces the toy fold u² + λ = 1 with psarc and compares against the
/// closed-form path: the apex must reach λ = 1 within `lambda_tol` and
/// every point must sit on u = ±sqrt(1 - λ).
pub fn run_toy_fold(ds: f64, lambda_tol: f64) -> Result<ToyFoldReport> {
    let problem = toy_fold_problem();
    let x0 = vec![1.0, 0.0];
    let t0 = initial_tangent(&problem, &x0)?;
    let mut cfg = PsarcConfig::new(ds, 2.5);
    cfg.lambda_window = Some((-1.0, 2.0));
    let path = psarc(&problem, &x0, &t0, &cfg)?;

    let mut violations = Vec::new();
    let max_lambda = path.max_lambda_point().lambda;
    if (max_lambda - 1.0).abs() > lambda_tol {
        violations.push(format!(
            "max λ = {max_lambda} misses the fold at 1 by more than {lambda_tol}"
        ));
    }
    let mut max_gap = 0.0f64;
    for pt in &path.points {
        let expected = (1.0 - pt.lambda).max(0.0).sqrt();
        let gap = (pt.u[0].abs() - expected).abs();
        if gap > max_gap {
            max_gap = gap;
        }
    }
    if max_gap > 1e-6 {
        violations.push(format!("path strays from ±sqrt(1-λ) by {max_gap:.3e}"));
    }
    if path.failed() {
        violations.push(format!("continuation failed: {:?}", path.termination));
    }
    Ok(ToyFoldReport {
        ds,
        points: path.points.len(),
        max_lambda,
        max_path_gap: max_gap,
        violations,
    })
}
