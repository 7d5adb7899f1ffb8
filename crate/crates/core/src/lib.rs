//! Regularized Tyler estimation of scatter matrices.
//!
//! The estimator blends Tyler's distribution-free scatter fixed point with a
//! shrinkage term toward the identity, keeping every eigenvalue above the
//! regularization parameter ρ. This crate provides:
//!
//! * [`model`] — population covariance models (Toeplitz correlation and
//!   arbitrary Hermitian PD matrices) and complex Gaussian sampling;
//! * [`rte`] — the fixed-point solver plus its two random equivalents;
//! * [`limit`] — the deterministic large-sample limit Σ₀(ρ) through the
//!   per-eigenvalue interference-function iteration, and the asymptotic bias;
//! * [`special`] — the Lauricella F_D integral and the Gaussian
//!   quadratic-ratio moments α(D), β(D) behind the limit and the CLT;
//! * [`clt`] — the N²×N² covariance / pseudo-covariance matrices of the
//!   fluctuations around Σ₀(ρ);
//! * [`experiments`] — a deterministic, replication-parallel Monte Carlo
//!   harness with CSV/JSON reporting.

pub mod clt;
pub mod error;
pub mod experiments;
pub mod limit;
pub mod linalg;
pub mod model;
pub mod quad;
pub mod rte;
pub mod special;

pub use error::{Error, Result};
pub use limit::{asymptotic_bias, sigma_zero, AsymptoticLimit};
pub use model::{hermitian_sqrt, CovarianceModel, Dataset};
pub use rte::{gamma_n, s_hat, sigma_tilde, solve_rte, ScatterEstimate};
