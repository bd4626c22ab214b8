//! Numerical continuation through simple folds.
//!
//! This crate traces solution paths of parameterized nonlinear systems
//! G(u, λ) = 0 with plain parameter continuation ([`continuation::paramc`])
//! and pseudo-arclength continuation ([`continuation::psarc`]), and
//! quantifies why the latter survives simple folds:
//!
//! - [`spectral`] proves out a rank-one lower bound for the smallest
//!   eigenvalue of A + yyᵀ that sharpens the Weyl interval;
//! - [`fold`] classifies path points through the SVD of G_u and evaluates
//!   the resulting lower bound on σ_min of the bordered Jacobian;
//! - [`cluster`] splits Jacobians as I + K + E and verifies the GMRES
//!   residual envelope that low-rank structure predicts;
//! - [`problems`] ships the discretized Chandrasekhar H-equation (whose
//!   path folds at c = 1), a scalar toy fold, and a synthetic I + K + E
//!   generator;
//! - [`gmres`] and [`newton`] are the solver stack: full GMRES with
//!   residual history and Newton with direct or matrix-free backends.
//!
//! The hot loops (matrix products, H-equation assembly, fuzz suites) run
//! data-parallel under the default `parallel` feature and fall back to
//! sequential code without it; results are bit-identical either way.

pub mod cluster;
pub mod continuation;
pub mod error;
pub mod fold;
pub mod gmres;
pub mod linalg;
pub mod newton;
pub mod par;
pub mod problems;
pub mod report;
pub mod spectral;
pub mod suites;

pub use error::{Error, Result};
