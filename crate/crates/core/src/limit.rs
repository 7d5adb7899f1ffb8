//! Deterministic large-sample limit of the regularized Tyler estimator.
//!
//! The limit Σ₀(ρ) shares the eigenvector matrix `U` of the population
//! covariance. Its eigenvalues are `s_i = λ_i / d_i` where `d` solves the
//! per-eigenvalue system
//!
//! ```text
//! 1/d_i = ρ/λ_i + N(1-ρ) alpha_i(diag(d))
//! ```
//!
//! The right-hand side (as a map of `d`) is a standard interference function:
//! nonnegative, monotone and scalable for ρ > 0, so the fixed point is unique
//! and reached by plain iteration from any positive start.

use crate::error::{Error, Result};
use crate::linalg::{from_eig, CMat, RVec};
use crate::model::CovarianceModel;
use crate::special::{alpha_with_tol, DiagonalWeights};

/// Hard cap for iterates relative to the feasibility witness `1/λ_min`:
/// a `d_i` above `10/λ_min` signals divergence (cannot happen for a
/// contraction that started at `d = λ`, so it aborts with a diagnostic).
const DIVERGENCE_FACTOR: f64 = 10.0;

/// Σ₀(ρ) carried in the shared-eigenvector parameterization.
#[derive(Debug, Clone)]
pub struct AsymptoticLimit {
    pub rho: f64,
    /// Eigenvector matrix shared with the population covariance.
    pub eigvecs: CMat,
    /// Population eigenvalues, decreasing.
    pub lambda: RVec,
    /// Solution of the per-eigenvalue fixed point.
    pub d: RVec,
    /// Limit eigenvalues `s_i = λ_i / d_i`.
    pub s: RVec,
    /// `U diag(s) U*`.
    pub sigma0: CMat,
    pub iterations: usize,
    /// Final max relative change in `d`.
    pub residual: f64,
}

/// Diagnostics of the `d`-vector solve.
#[derive(Debug, Clone)]
pub struct DSolve {
    pub d: Vec<f64>,
    pub iterations: usize,
    /// Final max relative change between iterates.
    pub residual: f64,
    /// Fixed-point equation residual `max_i |1/d_i - ρ/λ_i - N(1-ρ)α_i|`
    /// evaluated with a fresh quadrature call at the returned point.
    pub equation_residual: f64,
}

/// Solve the per-eigenvalue system by the interference-function iteration
/// `d_i ← 1/(ρ/λ_i + N(1-ρ) α_i(diag(d)))`, starting from `d = λ`.
///
/// Convergence is declared when the fixed-point equation residual drops to
/// `tol`; quadrature runs at `tol/100` so the inner error stays negligible.
pub fn solve_d(lambda: &[f64], rho: f64, tol: f64, max_iter: usize) -> Result<DSolve> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Domain(format!(
            "solve_d requires rho in (0, 1], got {rho}"
        )));
    }
    if tol <= 0.0 || tol.is_nan() {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if lambda.is_empty() {
        return Err(Error::Domain("lambda must be nonempty".into()));
    }
    if let Some(&bad) = lambda.iter().find(|&&l| l <= 0.0 || l.is_nan()) {
        return Err(Error::Domain(format!(
            "eigenvalues must be strictly positive, got {bad}"
        )));
    }
    let n = lambda.len() as f64;
    let lambda_min = lambda.iter().cloned().fold(f64::MAX, f64::min);
    let bound = DIVERGENCE_FACTOR / lambda_min;
    let quad_tol = tol / 100.0;

    let mut d: Vec<f64> = lambda.to_vec();
    let mut rel_change = 0.0;
    for iter in 0..=max_iter {
        let weights = DiagonalWeights::new(d.clone())?;
        let alphas = alpha_with_tol(&weights, quad_tol)?;
        let mut eq_residual = 0.0f64;
        let mut next = vec![0.0; d.len()];
        for i in 0..d.len() {
            let rhs = rho / lambda[i] + n * (1.0 - rho) * alphas[i];
            eq_residual = eq_residual.max((1.0 / d[i] - rhs).abs());
            next[i] = 1.0 / rhs;
        }
        if eq_residual <= tol {
            return Ok(DSolve {
                d,
                iterations: iter,
                residual: rel_change,
                equation_residual: eq_residual,
            });
        }
        rel_change = d
            .iter()
            .zip(&next)
            .map(|(old, new)| (new - old).abs() / old)
            .fold(0.0f64, f64::max);
        d = next;
        if let Some((i, &v)) = d.iter().enumerate().find(|(_, &v)| v > bound) {
            return Err(Error::LimitDiverged {
                index: i,
                value: v,
                bound,
            });
        }
    }
    Err(Error::LimitNoConvergence {
        iterations: max_iter,
        residual: rel_change,
        last: d,
    })
}

/// Compute Σ₀(ρ) for a model: run [`solve_d`] on its eigenvalues and
/// reassemble through the shared eigenvectors.
pub fn sigma_zero(model: &CovarianceModel, rho: f64, tol: f64) -> Result<AsymptoticLimit> {
    let solve = solve_d(model.eigvals().as_slice(), rho, tol, 1000)?;
    let lambda = model.eigvals().clone();
    let d = RVec::from_vec(solve.d);
    let s = RVec::from_fn(lambda.len(), |i, _| lambda[i] / d[i]);
    let sigma0 = from_eig(model.eigvecs(), &s);
    Ok(AsymptoticLimit {
        rho,
        eigvecs: model.eigvecs().clone(),
        lambda,
        d,
        s,
        sigma0,
        iterations: solve.iterations,
        residual: solve.residual,
    })
}

impl AsymptoticLimit {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// `Σ₀^{1/2}` through the shared eigenvectors.
    pub fn sigma0_sqrt(&self) -> CMat {
        from_eig(&self.eigvecs, &self.s.map(f64::sqrt))
    }

    /// `Σ₀^{-1/2}` through the shared eigenvectors.
    pub fn sigma0_inv_sqrt(&self) -> CMat {
        from_eig(&self.eigvecs, &self.s.map(|v| 1.0 / v.sqrt()))
    }

    /// `Σ₀^{-1}` through the shared eigenvectors.
    pub fn sigma0_inv(&self) -> CMat {
        from_eig(&self.eigvecs, &self.s.map(|v| 1.0 / v))
    }
}

/// Large-n limit of the scale-normalized bias
/// `‖(N / tr(Σ⁻¹Σ₀)) Σ⁻¹Σ₀ − I‖²_Fro / N`.
///
/// Σ and Σ₀ co-diagonalize, so with `r_i = s_i/λ_i = 1/d_i` this reduces to
/// `Σ_i (N r_i / Σ_j r_j − 1)² / N`. The 1/N normalization matches the
/// reported bias curves this library reproduces.
pub fn asymptotic_bias(model: &CovarianceModel, rho: f64) -> Result<f64> {
    let limit = sigma_zero(model, rho, 1e-9)?;
    Ok(bias_from_ratios(limit.d.as_slice()))
}

pub(crate) fn bias_from_ratios(d: &[f64]) -> f64 {
    let n = d.len() as f64;
    let r: Vec<f64> = d.iter().map(|di| 1.0 / di).collect();
    let total: f64 = r.iter().sum();
    r.iter().map(|ri| (n * ri / total - 1.0).powi(2)).sum::<f64>() / n
}
