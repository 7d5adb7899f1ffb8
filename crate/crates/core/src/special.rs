//! Gaussian quadratic-ratio moments and the Lauricella F_D integral.
//!
//! For a standard circular complex Gaussian vector `w` and a positive
//! diagonal matrix `D`, the first and second ratio moments
//!
//! ```text
//! alpha_i(D) = E[ |w_i|^2 / (w* D w) ]
//! beta_ij(D) = E[ |w_i|^2 |w_j|^2 / (w* D w)^2 ]
//! ```
//!
//! admit one-dimensional integral representations on [0, 1] obtained by the
//! exponential-integral trick and the substitution `t = 1/v - 1`. Both are
//! evaluated directly by adaptive quadrature; the equivalent Lauricella F_D
//! closed forms are exposed through [`lauricella_fd`] and cross-checked in
//! tests. The ratios are invariant to the per-entry variance convention of
//! `w`, so no scale factors appear anywhere downstream.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};

/// Largest admissible max/min ratio of the diagonal weights. Beyond this the
/// integrands peak too sharply for the configured budget and results would be
/// silently degraded.
const MAX_CONDITIONING: f64 = 1e8;

/// Strictly positive diagonal weights (the diagonal of `D`).
#[derive(Debug, Clone)]
pub struct DiagonalWeights {
    d: Vec<f64>,
}

impl DiagonalWeights {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::Domain("diagonal weights must be nonempty".into()));
        }
        if let Some(&bad) = d.iter().find(|&&x| x <= 0.0 || !x.is_finite()) {
            return Err(Error::Domain(format!(
                "diagonal weights must be strictly positive, got {bad}"
            )));
        }
        Ok(Self { d })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }

    fn conditioning(&self) -> f64 {
        let max = self.d.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.d.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }

    fn check_conditioning(&self) -> Result<()> {
        let ratio = self.conditioning();
        if ratio > MAX_CONDITIONING {
            return Err(Error::WeightsConditioning { ratio });
        }
        Ok(())
    }
}

/// First and second ratio moments for a fixed set of weights, together with
/// the absolute quadrature tolerance they were computed at.
#[derive(Debug, Clone)]
pub struct RatioMoments {
    pub alpha: DVector<f64>,
    pub beta: DMatrix<f64>,
    pub quad_tolerance: f64,
}

impl RatioMoments {
    pub fn compute(d: &DiagonalWeights, quad_tol: f64) -> Result<Self> {
        let alpha = DVector::from_vec(alpha_with_tol(d, quad_tol)?);
        let beta = beta_with_tol(d, quad_tol)?;
        Ok(Self {
            alpha,
            beta,
            quad_tolerance: quad_tol,
        })
    }
}

fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Lauricella type-D hypergeometric function by its Euler integral
/// representation,
///
/// ```text
/// F_D(a; b_1..b_n; c; x_1..x_n)
///   = Γ(c)/(Γ(a)Γ(c-a)) ∫_0^1 t^{a-1} (1-t)^{c-a-1} Π_i (1 - x_i t)^{-b_i} dt
/// ```
///
/// valid for `c > a > 0` and all `x_i < 1`.
pub fn lauricella_fd(a: f64, b: &[f64], c: f64, x: &[f64], opts: &QuadOptions) -> Result<f64> {
    if !(c > a && a > 0.0) {
        return Err(Error::Domain(format!(
            "lauricella_fd requires c > a > 0, got a = {a}, c = {c}"
        )));
    }
    if b.len() != x.len() {
        return Err(Error::Domain(format!(
            "lauricella_fd requires matching parameter lengths, got {} and {}",
            b.len(),
            x.len()
        )));
    }
    if let Some(&bad) = x.iter().find(|&&xi| xi >= 1.0) {
        return Err(Error::Domain(format!(
            "lauricella_fd argument x = {bad} >= 1 makes the integrand singular on [0, 1]"
        )));
    }
    let prefactor = (ln_gamma(c) - ln_gamma(a) - ln_gamma(c - a)).exp();
    let b = b.to_vec();
    let x = x.to_vec();
    let integrand = move |t: f64| {
        let mut prod = t.powf(a - 1.0) * (1.0 - t).powf(c - a - 1.0);
        for (bi, xi) in b.iter().zip(x.iter()) {
            prod *= (1.0 - xi * t).powf(-bi);
        }
        prod
    };
    let r = integrate(integrand, 0.0, 1.0, opts)?;
    Ok(prefactor * r.value)
}

/// `alpha_i(D)` for every i, at the default 1e-10 quadrature tolerance.
pub fn alpha(d: &DiagonalWeights) -> Result<Vec<f64>> {
    alpha_with_tol(d, QuadOptions::default().abs_tol)
}

/// `alpha_i(D)` for every i, evaluated by adaptive quadrature of the direct
/// integral representation to the given absolute tolerance.
pub fn alpha_with_tol(d: &DiagonalWeights, quad_tol: f64) -> Result<Vec<f64>> {
    d.check_conditioning()?;
    let n = d.dim();
    let dv = d.as_slice();
    let x: Vec<f64> = dv.iter().map(|&di| (di - 0.5) / di).collect();
    let log_scale = (n as f64) * std::f64::consts::LN_2
        + dv.iter().map(|&di| di.ln()).sum::<f64>();
    let opts = QuadOptions {
        abs_tol: quad_tol,
        ..QuadOptions::default()
    };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let scale = (log_scale + dv[i].ln()).exp();
        let xi = x[i];
        let xs = x.clone();
        let f = move |v: f64| {
            let mut denom = (1.0 - xi * v) * scale;
            for &xj in &xs {
                denom *= 1.0 - xj * v;
            }
            v.powi(n as i32 - 1) / denom
        };
        out.push(integrate(f, 0.0, 1.0, &opts)?.value);
    }
    Ok(out)
}

/// `beta_{ij}(D)` as a symmetric matrix, at the default tolerance.
pub fn beta(d: &DiagonalWeights) -> Result<DMatrix<f64>> {
    beta_with_tol(d, QuadOptions::default().abs_tol)
}

/// `beta_{ij}(D)`, each entry one adaptive quadrature of the direct integral.
pub fn beta_with_tol(d: &DiagonalWeights, quad_tol: f64) -> Result<DMatrix<f64>> {
    d.check_conditioning()?;
    let n = d.dim();
    let dv = d.as_slice();
    let x: Vec<f64> = dv.iter().map(|&di| (di - 0.5) / di).collect();
    let log_prod = dv.iter().map(|&di| di.ln()).sum::<f64>();
    let opts = QuadOptions {
        abs_tol: quad_tol,
        ..QuadOptions::default()
    };
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            // diagonal entries carry one power of 2 less and a squared factor
            let log_scale = if i == j {
                (n as f64 - 1.0) * std::f64::consts::LN_2 + log_prod + 2.0 * dv[i].ln()
            } else {
                (n as f64) * std::f64::consts::LN_2 + log_prod + dv[i].ln() + dv[j].ln()
            };
            let scale = log_scale.exp();
            let (xi, xj) = (x[i], x[j]);
            let xs = x.clone();
            let same = i == j;
            let f = move |v: f64| {
                let lead = if same {
                    (1.0 - xi * v) * (1.0 - xi * v)
                } else {
                    (1.0 - xi * v) * (1.0 - xj * v)
                };
                let mut denom = lead * scale;
                for &xk in &xs {
                    denom *= 1.0 - xk * v;
                }
                (1.0 - v) * v.powi(n as i32 - 1) / denom
            };
            let val = integrate(f, 0.0, 1.0, &opts)?.value;
            out[(i, j)] = val;
            out[(j, i)] = val;
        }
    }
    Ok(out)
}
