//! The regularized Tyler scatter fixed point and its two random equivalents.
//!
//! The estimator is the unique solution of
//!
//! ```text
//! C = (1-ρ) (1/n) Σ_i x_i x_i* / ((1/N) x_i* C^{-1} x_i) + ρ I
//! ```
//!
//! for ρ in (max(0, 1 - n/N), 1], solved by Picard iteration from C = I.
//! Every eigenvalue of the fixed point is at least ρ by construction.

use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::limit::AsymptoticLimit;
use crate::linalg::CMat;
use crate::model::CovarianceModel;

/// A solved scatter matrix with iteration diagnostics.
#[derive(Debug, Clone)]
pub struct ScatterEstimate {
    pub matrix: CMat,
    pub rho: f64,
    pub iterations: usize,
    /// Final relative Frobenius change between iterates.
    pub residual: f64,
    pub converged: bool,
}

fn check_rho_domain(rho: f64, n: usize, dim: usize) -> Result<()> {
    let lower = (1.0 - n as f64 / dim as f64).max(0.0);
    if rho.is_nan() || rho <= lower || rho > 1.0 {
        return Err(Error::Domain(format!(
            "rho = {rho} outside (max(0, 1 - n/N), 1] = ({lower}, 1]"
        )));
    }
    Ok(())
}

/// Weighted scatter update `(1-ρ)/n Σ_i x_i x_i* / q_i + ρ I` where
/// `q_i = (1/N) x_i* C^{-1} x_i`. Returns `None` on a non-HPD iterate
/// (cannot happen for ρ > 0, kept as a guard). Works on flat column slices
/// with a caller-provided scratch vector; the Monte Carlo harness calls this
/// hundreds of thousands of times.
fn picard_step(samples: &CMat, c: &CMat, rho: f64, scratch: &mut Vec<Complex64>) -> Option<CMat> {
    let dim = samples.nrows();
    let n = samples.ncols();
    let inv = Cholesky::new(c.clone())?.inverse();
    let inv_cols = inv.as_slice();
    scratch.clear();
    scratch.resize(dim * dim + dim, Complex64::new(0.0, 0.0));
    let (acc, y) = scratch.split_at_mut(dim * dim);
    let coeff = (1.0 - rho) * dim as f64 / n as f64;
    for x in samples.as_slice().chunks_exact(dim) {
        // y = C^{-1} x, walking the inverse column-major
        y.fill(Complex64::new(0.0, 0.0));
        for (l, &xl) in x.iter().enumerate() {
            let col = &inv_cols[l * dim..(l + 1) * dim];
            for (k, &ikl) in col.iter().enumerate() {
                y[k] += ikl * xl;
            }
        }
        let q: f64 = x.iter().zip(y.iter()).map(|(xk, yk)| (xk.conj() * yk).re).sum();
        if q <= 0.0 {
            return None;
        }
        let w = coeff / q;
        // accumulate w · x x* column-major, upper triangle k <= l
        for l in 0..dim {
            let xl_w = x[l].conj() * w;
            let col = &mut acc[l * dim..(l + 1) * dim];
            for k in 0..=l {
                col[k] += x[k] * xl_w;
            }
        }
    }
    let mut next = CMat::zeros(dim, dim);
    for l in 0..dim {
        for k in 0..=l {
            let v = acc[l * dim + k];
            next[(k, l)] = v;
            next[(l, k)] = v.conj();
        }
        next[(l, l)] = Complex64::new(next[(l, l)].re + rho, 0.0);
    }
    Some(next)
}

/// Solve the scatter fixed point on the given samples (columns are
/// observations). Stops when the relative Frobenius change drops below
/// `tol`; fails with [`Error::RteNoConvergence`] carrying the last iterate
/// if `max_iter` is reached first.
pub fn solve_rte(samples: &CMat, rho: f64, tol: f64, max_iter: usize) -> Result<ScatterEstimate> {
    let dim = samples.nrows();
    let n = samples.ncols();
    if dim == 0 || n == 0 {
        return Err(Error::Domain("samples must be a nonempty matrix".into()));
    }
    if tol <= 0.0 || tol.is_nan() {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    check_rho_domain(rho, n, dim)?;
    for i in 0..n {
        if samples.column(i).norm_squared() == 0.0 {
            return Err(Error::DegenerateSample { index: i });
        }
    }

    let mut c = CMat::identity(dim, dim);
    let mut residual = f64::INFINITY;
    let mut scratch = Vec::new();
    for iter in 1..=max_iter {
        let next = picard_step(samples, &c, rho, &mut scratch).ok_or_else(|| {
            Error::Domain("scatter iterate lost positive definiteness".into())
        })?;
        residual = (&next - &c).norm() / c.norm();
        c = next;
        if residual <= tol {
            return Ok(ScatterEstimate {
                matrix: c,
                rho,
                iterations: iter,
                residual,
                converged: true,
            });
        }
    }
    Err(Error::RteNoConvergence {
        last: Box::new(ScatterEstimate {
            matrix: c,
            rho,
            iterations: max_iter,
            residual,
            converged: false,
        }),
    })
}

/// Evaluate the right-hand side of the fixed-point equation at `c`.
/// Substituting a solved estimate back in reproduces it up to the stopping
/// tolerance; exposed for residual checks.
pub fn rte_rhs(samples: &CMat, c: &CMat, rho: f64) -> Result<CMat> {
    picard_step(samples, c, rho, &mut Vec::new())
        .ok_or_else(|| Error::Domain("matrix is not positive definite".into()))
}

/// The unique positive solution γ of
/// `1 = (1/N) tr Σ (ρ γ + (1-ρ) Σ)^{-1}`,
/// found by bisection (the trace is strictly decreasing in γ).
pub fn gamma_n(model: &CovarianceModel, rho: f64, tol: f64) -> Result<f64> {
    if rho.is_nan() || rho <= 0.0 || rho > 1.0 {
        return Err(Error::Domain(format!(
            "gamma_n requires rho in (0, 1], got {rho}"
        )));
    }
    if tol <= 0.0 || tol.is_nan() {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let lambdas = model.eigvals();
    let dim = model.dim() as f64;
    let trace = |gamma: f64| -> f64 {
        lambdas
            .iter()
            .map(|&l| l / (rho * gamma + (1.0 - rho) * l))
            .sum::<f64>()
            / dim
    };
    // trace(0+) = 1/(1-ρ) > 1 (or +∞ at ρ = 1); expand until below 1
    let mut lo = 0.0;
    let mut hi = 1.0;
    while trace(hi) > 1.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Domain("gamma bracket expansion failed".into()));
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let t = trace(mid);
        if (t - 1.0).abs() <= tol {
            return Ok(mid);
        }
        if t > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// The large-n,N random equivalent
/// `Ŝ(ρ) = (1/γ) (1-ρ)/(1-(1-ρ) c_N) (1/n) Σ_i x_i x_i* + ρ I`,
/// with `c_N = N/n`, built on the same observations the estimator saw.
pub fn s_hat(samples: &CMat, model: &CovarianceModel, rho: f64) -> Result<CMat> {
    let dim = samples.nrows();
    let n = samples.ncols();
    check_rho_domain(rho, n, dim)?;
    let c_n = dim as f64 / n as f64;
    if (1.0 - rho) * c_n >= 1.0 {
        return Err(Error::Domain(format!(
            "(1-rho) N/n = {} >= 1",
            (1.0 - rho) * c_n
        )));
    }
    let gamma = gamma_n(model, rho, 1e-12)?;
    let coeff = (1.0 - rho) / (gamma * (1.0 - (1.0 - rho) * c_n) * n as f64);
    let mut out = samples * samples.adjoint() * Complex64::new(coeff, 0.0);
    for k in 0..dim {
        out[(k, k)] += Complex64::new(rho, 0.0);
    }
    Ok(out)
}

/// The large-n random equivalent
/// `Σ̃(ρ) = N(1-ρ) (1/n) Σ_i x_i x_i* / (x_i* Σ₀^{-1} x_i) + ρ I`,
/// an explicit (iteration-free) unbiased estimate of Σ₀(ρ).
pub fn sigma_tilde(samples: &CMat, limit: &AsymptoticLimit) -> Result<CMat> {
    let dim = samples.nrows();
    let n = samples.ncols();
    if limit.sigma0.nrows() != dim {
        return Err(Error::Domain(format!(
            "limit dimension {} does not match samples dimension {dim}",
            limit.sigma0.nrows()
        )));
    }
    let rho = limit.rho;
    let chol = Cholesky::new(limit.sigma0.clone())
        .ok_or_else(|| Error::Domain("limit matrix is not positive definite".into()))?;
    let solved = chol.solve(samples);
    let mut weighted = samples.clone();
    let coeff = dim as f64 * (1.0 - rho) / n as f64;
    for i in 0..n {
        let mut q = 0.0;
        for k in 0..dim {
            q += (samples[(k, i)].conj() * solved[(k, i)]).re;
        }
        if q <= 0.0 {
            return Err(Error::DegenerateSample { index: i });
        }
        let w = Complex64::new((coeff / q).sqrt(), 0.0);
        for k in 0..dim {
            weighted[(k, i)] *= w;
        }
    }
    let mut out = &weighted * weighted.adjoint();
    for k in 0..dim {
        out[(k, k)] += Complex64::new(rho, 0.0);
    }
    Ok(out)
}
