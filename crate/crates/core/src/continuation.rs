//! Parameter continuation and pseudo-arclength continuation.
//!
//! Parameter continuation steps λ directly and must fail where G_u turns
//! singular. Pseudo-arclength continuation reparameterizes by s and solves
//! the extended system
//!
//!   F(x, s) = ( G(x) ; ẋ₀ᵀ(x - x₀) - (s - s₀) ) = 0,
//!
//! whose bordered Jacobian stays nonsingular through simple folds. The
//! driver records per-point fold diagnostics so a whole run doubles as an
//! experiment on the conditioning bounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fold::{assemble_bordered, classify_point, FoldDiagnostics};
use crate::linalg::{self, dot, lu_solve, norm, sub};
use crate::newton::{newton_direct, newton_gmres, NewtonResult, NewtonTols};
use crate::problems::ProblemDef;

/// Linear-solve backend for the corrector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SolverBackend {
    /// Assembled Jacobian, LU factorization.
    Direct,
    /// Matrix-free Newton-GMRES with a fixed forcing term.
    NewtonGmres { forcing: f64 },
}

/// Predictor for the next point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Predictor {
    /// Use the current point as the initial iterate.
    None,
    /// Euler step along the (secant) tangent: x₀ + ds ẋ₀.
    EulerSecant,
}

/// The affine constraint N(x, s) = ẋ₀ᵀ(x - x₀) - (s - s₀) pinning the new
/// point to the hyperplane through the predictor.
#[derive(Debug, Clone)]
pub struct NormalizationEq {
    pub x0: Vec<f64>,
    pub s0: f64,
    pub tangent0: Vec<f64>,
}

impl NormalizationEq {
    pub fn eval(&self, x: &[f64], s: f64) -> f64 {
        debug_assert_eq!(x.len(), self.x0.len());
        let mut acc = 0.0;
        for i in 0..x.len() {
            acc += self.tangent0[i] * (x[i] - self.x0[i]);
        }
        acc - (s - self.s0)
    }
}

/// Length-(N+1) residual of the extended system: G stacked over N(x, s).
pub fn extended_residual(
    problem: &dyn ProblemDef,
    norm_eq: &NormalizationEq,
    x: &[f64],
    s: f64,
) -> Result<Vec<f64>> {
    let n = problem.dimension();
    if x.len() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "extended state has length {}, expected {}",
            x.len(),
            n + 1
        )));
    }
    let mut f = problem.residual(&x[..n], x[n])?;
    f.push(norm_eq.eval(x, s));
    Ok(f)
}

/// Normalized secant direction from `x_prev` to `x_curr`, flipped if needed
/// to keep a positive inner product with `previous_tangent`.
pub fn secant_tangent(
    x_prev: &[f64],
    x_curr: &[f64],
    previous_tangent: &[f64],
) -> Result<Vec<f64>> {
    let mut t = sub(x_curr, x_prev);
    if norm(&t) == 0.0 {
        return Err(Error::Precondition(
            "secant tangent is undefined for coincident points".into(),
        ));
    }
    linalg::normalize(&mut t)?;
    if dot(&t, previous_tangent) < 0.0 {
        linalg::scale(&mut t, -1.0);
    }
    Ok(t)
}

/// Exact tangent at a regular point: solve G_u u̇ = -G_λ, set λ̇ = 1,
/// normalize. The sign convention λ̇ > 0 starts the path toward
/// increasing λ.
pub fn initial_tangent(problem: &dyn ProblemDef, x0: &[f64]) -> Result<Vec<f64>> {
    let n = problem.dimension();
    if x0.len() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "extended state has length {}, expected {}",
            x0.len(),
            n + 1
        )));
    }
    let (u, lambda) = (&x0[..n], x0[n]);
    let g_u = problem.jacobian(u, lambda)?;
    let g_l = problem.lambda_derivative(u, lambda)?;
    let rhs: Vec<f64> = g_l.iter().map(|v| -v).collect();
    let u_dot = lu_solve(&g_u, &rhs).map_err(|e| match e {
        Error::SingularMatrix { column, pivot } => Error::Precondition(format!(
            "G_u is singular at the starting point (pivot {pivot:.3e} in column \
             {column}); start the continuation away from folds"
        )),
        other => other,
    })?;
    let mut t = u_dot;
    t.push(1.0);
    linalg::normalize(&mut t)?;
    Ok(t)
}

/// Condensed Newton statistics stored per path point.
#[derive(Debug, Clone, Serialize)]
pub struct NewtonSummary {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    pub inner_iterations: Vec<usize>,
    pub average_inner: f64,
}

impl From<&NewtonResult> for NewtonSummary {
    fn from(r: &NewtonResult) -> Self {
        Self {
            iterations: r.iterations,
            final_residual: r.final_residual(),
            converged: r.converged,
            inner_iterations: r.gmres_iterations_per_step.clone(),
            average_inner: r.average_inner_iterations(),
        }
    }
}

/// One accepted continuation point.
#[derive(Debug, Clone, Serialize)]
pub struct PathPoint {
    pub u: Vec<f64>,
    pub lambda: f64,
    pub s: f64,
    /// Unit tangent in use when leaving this point.
    pub tangent: Vec<f64>,
    /// Problem observable at this point (e.g. the discrete solution norm).
    pub functional: f64,
    pub diagnostics: Option<FoldDiagnostics>,
    pub newton: NewtonSummary,
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Termination {
    ReachedEnd,
    LambdaWindowExit { lambda: f64 },
    PointBudget,
    /// The corrector failed; the path is truncated at the last good point.
    Failure { at_lambda: f64, reason: String },
}

/// A recorded continuation run.
#[derive(Debug, Clone, Serialize)]
pub struct Path {
    pub points: Vec<PathPoint>,
    pub problem_id: String,
    pub config_snapshot: String,
    pub termination: Termination,
}

impl Path {
    pub fn last(&self) -> &PathPoint {
        self.points.last().expect("a path holds at least its starting point")
    }

    pub fn max_lambda_point(&self) -> &PathPoint {
        self.points
            .iter()
            .max_by(|a, b| a.lambda.partial_cmp(&b.lambda).expect("finite lambdas"))
            .expect("a path holds at least its starting point")
    }

    pub fn failed(&self) -> bool {
        matches!(self.termination, Termination::Failure { .. })
    }
}

/// Settings for [`paramc`].
#[derive(Debug, Clone, Serialize)]
pub struct ParamcConfig {
    pub backend: SolverBackend,
    pub tols: NewtonTols,
}

impl Default for ParamcConfig {
    fn default() -> Self {
        Self { backend: SolverBackend::Direct, tols: NewtonTols::default() }
    }
}

fn solve_g(
    problem: &dyn ProblemDef,
    lambda: f64,
    u0: &[f64],
    backend: SolverBackend,
    tols: &NewtonTols,
) -> Result<NewtonResult> {
    match backend {
        SolverBackend::Direct => newton_direct(
            |u| problem.residual(u, lambda),
            |u| problem.jacobian(u, lambda),
            u0,
            tols,
        ),
        SolverBackend::NewtonGmres { forcing } => {
            newton_gmres(|u: &[f64]| problem.residual(u, lambda), u0, forcing, tols)
        }
    }
}

/// Simple parameter continuation from λ_init to λ_end in steps of dλ.
///
/// Each solve starts from the previous solution. Failure mid-path (the
/// expected outcome when a fold sits inside the window) truncates the path
/// and records the failure; failure on the very first solve is an error.
pub fn paramc(
    problem: &dyn ProblemDef,
    lambda_init: f64,
    lambda_end: f64,
    dlambda: f64,
    u_init: &[f64],
    cfg: &ParamcConfig,
) -> Result<Path> {
    if dlambda <= 0.0 {
        return Err(Error::Precondition(format!("dlambda must be positive, got {dlambda}")));
    }
    if lambda_init >= lambda_end {
        return Err(Error::Precondition(format!(
            "need lambda_init < lambda_end, got {lambda_init} >= {lambda_end}"
        )));
    }
    let n = problem.dimension();
    let mut lambda_dir = vec![0.0; n + 1];
    lambda_dir[n] = 1.0;

    let first = solve_g(problem, lambda_init, u_init, cfg.backend, &cfg.tols)
        .ok()
        .filter(|r| r.converged)
        .ok_or_else(|| {
            Error::NoStartingPoint(format!("first solve at lambda = {lambda_init} failed"))
        })?;

    let mut points = vec![PathPoint {
        functional: problem.functional(&first.solution),
        u: first.solution.clone(),
        lambda: lambda_init,
        s: 0.0,
        tangent: lambda_dir.clone(),
        diagnostics: None,
        newton: NewtonSummary::from(&first),
    }];

    let mut u = first.solution;
    let mut termination = Termination::ReachedEnd;
    let mut k = 0usize;
    loop {
        k += 1;
        let lambda = lambda_init + k as f64 * dlambda;
        if lambda > lambda_end + 1e-12 {
            break;
        }
        match solve_g(problem, lambda, &u, cfg.backend, &cfg.tols) {
            Ok(res) if res.converged => {
                u = res.solution.clone();
                points.push(PathPoint {
                    functional: problem.functional(&res.solution),
                    u: res.solution.clone(),
                    lambda,
                    s: lambda - lambda_init,
                    tangent: lambda_dir.clone(),
                    diagnostics: None,
                    newton: NewtonSummary::from(&res),
                });
            }
            Ok(res) => {
                termination = Termination::Failure {
                    at_lambda: lambda,
                    reason: format!(
                        "Newton did not converge in {} iterations (residual {:.3e})",
                        res.iterations,
                        res.final_residual()
                    ),
                };
                break;
            }
            Err(e) => {
                termination = Termination::Failure { at_lambda: lambda, reason: e.to_string() };
                break;
            }
        }
    }

    Ok(Path {
        points,
        problem_id: problem.id(),
        config_snapshot: format!("paramc lambda=[{lambda_init},{lambda_end}] dlambda={dlambda} backend={:?}", cfg.backend),
        termination,
    })
}

/// Settings for [`psarc`].
#[derive(Debug, Clone, Serialize)]
pub struct PsarcConfig {
    pub ds: f64,
    pub s_end: f64,
    pub backend: SolverBackend,
    pub tols: NewtonTols,
    pub predictor: Predictor,
    /// Step halving on corrector failure (floor ds/64), stepping back up
    /// after two clean successes. Off by default: the figure reproductions
    /// run at fixed ds.
    pub adaptive: bool,
    /// Stop when λ leaves this window.
    pub lambda_window: Option<(f64, f64)>,
    pub max_points: usize,
    /// Record per-point fold diagnostics (one SVD of G_u and one of F_x
    /// per point).
    pub record_diagnostics: bool,
}

impl PsarcConfig {
    pub fn new(ds: f64, s_end: f64) -> Self {
        Self {
            ds,
            s_end,
            backend: SolverBackend::Direct,
            tols: NewtonTols::default(),
            predictor: Predictor::EulerSecant,
            adaptive: false,
            lambda_window: None,
            max_points: 100_000,
            record_diagnostics: true,
        }
    }

    fn snapshot(&self) -> String {
        format!(
            "psarc ds={} s_end={} backend={:?} predictor={:?} adaptive={} window={:?} max_points={}",
            self.ds, self.s_end, self.backend, self.predictor, self.adaptive,
            self.lambda_window, self.max_points
        )
    }
}

/// Pseudo-arclength continuation.
///
/// `x_init` is an (N+1)-vector (u, λ) solving G within the Newton
/// tolerance; `tangent_init` is the unit tangent there (see
/// [`initial_tangent`]). Each cycle predicts along the tangent, corrects by
/// Newton on the extended system, updates the tangent by the secant rule,
/// and records fold diagnostics. Simple folds are traversed without
/// failure.
pub fn psarc(
    problem: &dyn ProblemDef,
    x_init: &[f64],
    tangent_init: &[f64],
    cfg: &PsarcConfig,
) -> Result<Path> {
    let n = problem.dimension();
    if cfg.ds <= 0.0 {
        return Err(Error::Precondition(format!("ds must be positive, got {}", cfg.ds)));
    }
    if x_init.len() != n + 1 || tangent_init.len() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "state and tangent must have length {}, got {} and {}",
            n + 1,
            x_init.len(),
            tangent_init.len()
        )));
    }
    let t_norm = norm(tangent_init);
    if (t_norm - 1.0).abs() > 1e-6 {
        return Err(Error::Precondition(format!(
            "initial tangent must be unit length, got norm {t_norm}"
        )));
    }
    let mut tangent = tangent_init.to_vec();
    linalg::scale(&mut tangent, 1.0 / t_norm);

    let g0 = problem.residual(&x_init[..n], x_init[n])?;
    let g0_norm = norm(&g0);
    if g0_norm > 10.0 * cfg.tols.abs_tol.max(1e-14) {
        return Err(Error::Precondition(format!(
            "x_init does not solve G within tolerance: residual {g0_norm:.3e}"
        )));
    }

    let mut x = x_init.to_vec();
    let mut s = 0.0;
    let diag0 = if cfg.record_diagnostics {
        Some(point_diagnostics(problem, &x, &tangent)?)
    } else {
        None
    };
    let mut points = vec![PathPoint {
        functional: problem.functional(&x[..n]),
        u: x[..n].to_vec(),
        lambda: x[n],
        s,
        tangent: tangent.clone(),
        diagnostics: diag0,
        newton: NewtonSummary {
            iterations: 0,
            final_residual: g0_norm,
            converged: true,
            inner_iterations: Vec::new(),
            average_inner: 0.0,
        },
    }];

    let ds_min = cfg.ds / 64.0;
    let mut ds = cfg.ds;
    let mut clean_successes = 0usize;
    let mut termination = Termination::ReachedEnd;

    while s < cfg.s_end - 1e-12 {
        if points.len() >= cfg.max_points {
            termination = Termination::PointBudget;
            break;
        }
        let s_next = s + ds;
        let norm_eq = NormalizationEq { x0: x.clone(), s0: s, tangent0: tangent.clone() };
        let x_pred = match cfg.predictor {
            Predictor::None => x.clone(),
            Predictor::EulerSecant => linalg::add_scaled(&x, ds, &tangent),
        };

        let solve = correct(problem, &norm_eq, &x_pred, s_next, cfg);
        match solve {
            Ok(res) if res.converged => {
                let x_new = res.solution.clone();
                let new_tangent = secant_tangent(&x, &x_new, &tangent)?;
                let diagnostics = if cfg.record_diagnostics {
                    Some(point_diagnostics(problem, &x_new, &new_tangent)?)
                } else {
                    None
                };
                points.push(PathPoint {
                    functional: problem.functional(&x_new[..n]),
                    u: x_new[..n].to_vec(),
                    lambda: x_new[n],
                    s: s_next,
                    tangent: new_tangent.clone(),
                    diagnostics,
                    newton: NewtonSummary::from(&res),
                });
                x = x_new;
                tangent = new_tangent;
                s = s_next;

                if cfg.adaptive {
                    if res.iterations <= 3 {
                        clean_successes += 1;
                        if clean_successes >= 2 && ds < cfg.ds {
                            ds = (ds * 2.0).min(cfg.ds);
                            clean_successes = 0;
                        }
                    } else {
                        clean_successes = 0;
                    }
                }

                if let Some((lo, hi)) = cfg.lambda_window {
                    if x[n] < lo || x[n] > hi {
                        termination = Termination::LambdaWindowExit { lambda: x[n] };
                        break;
                    }
                }
            }
            Ok(res) => {
                if cfg.adaptive && ds > ds_min {
                    ds = (ds / 2.0).max(ds_min);
                    clean_successes = 0;
                    continue;
                }
                termination = Termination::Failure {
                    at_lambda: x[n],
                    reason: format!(
                        "corrector did not converge in {} iterations (residual {:.3e})",
                        res.iterations,
                        res.final_residual()
                    ),
                };
                break;
            }
            Err(e) => {
                if cfg.adaptive && ds > ds_min {
                    ds = (ds / 2.0).max(ds_min);
                    clean_successes = 0;
                    continue;
                }
                termination =
                    Termination::Failure { at_lambda: x[n], reason: e.to_string() };
                break;
            }
        }
    }

    Ok(Path {
        points,
        problem_id: problem.id(),
        config_snapshot: cfg.snapshot(),
        termination,
    })
}

fn correct(
    problem: &dyn ProblemDef,
    norm_eq: &NormalizationEq,
    x_pred: &[f64],
    s_next: f64,
    cfg: &PsarcConfig,
) -> Result<NewtonResult> {
    let n = problem.dimension();
    match cfg.backend {
        SolverBackend::Direct => newton_direct(
            |x| extended_residual(problem, norm_eq, x, s_next),
            |x| {
                let g_u = problem.jacobian(&x[..n], x[n])?;
                let g_l = problem.lambda_derivative(&x[..n], x[n])?;
                Ok(assemble_bordered(&g_u, &g_l, &norm_eq.tangent0)?.assembled)
            },
            x_pred,
            &cfg.tols,
        ),
        SolverBackend::NewtonGmres { forcing } => newton_gmres(
            |x: &[f64]| extended_residual(problem, norm_eq, x, s_next),
            x_pred,
            forcing,
            &cfg.tols,
        ),
    }
}

fn point_diagnostics(
    problem: &dyn ProblemDef,
    x: &[f64],
    tangent: &[f64],
) -> Result<FoldDiagnostics> {
    let n = problem.dimension();
    let g_u = problem.jacobian(&x[..n], x[n])?;
    let g_l = problem.lambda_derivative(&x[..n], x[n])?;
    classify_point(&g_u, &g_l, tangent)
}
