//! Population covariance models and complex Gaussian sampling.
//!
//! Observations are `x_i = Σ^{1/2} w_i` with `w_i ~ CN(0, I_N)` (independent
//! real and imaginary parts of variance 1/2 per entry, so E|w_ik|^2 = 1).
//! The population covariance is trace-normalized, `tr(Σ)/N = 1`, and must be
//! non-singular. The eigendecomposition is computed once at construction and
//! shared by every downstream consumer.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{eigh_desc, from_eig, CMat, RVec};

/// A population covariance with its cached spectral data.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    dim: usize,
    sigma: CMat,
    eigvecs: CMat,
    eigvals: RVec,
    sqrt: CMat,
    inv_sqrt: CMat,
}

impl CovarianceModel {
    /// Build a model from a Hermitian positive-definite matrix with
    /// `tr(Σ)/N = 1`.
    pub fn from_matrix(sigma: CMat) -> Result<Self> {
        let dim = sigma.nrows();
        if dim == 0 || sigma.ncols() != dim {
            return Err(Error::Domain(format!(
                "covariance must be square and nonempty, got {}x{}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        let asym = (&sigma - sigma.adjoint()).norm();
        if asym > 1e-10 * sigma.norm().max(1.0) {
            return Err(Error::Domain(format!(
                "covariance is not Hermitian (asymmetry {asym:.3e})"
            )));
        }
        let trace = sigma.diagonal().iter().map(|z| z.re).sum::<f64>();
        if (trace / dim as f64 - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "covariance must satisfy tr(Σ)/N = 1, got {}",
                trace / dim as f64
            )));
        }
        let (eigvals, eigvecs) = eigh_desc(&sigma);
        let lambda_min = eigvals[dim - 1];
        if lambda_min <= 0.0 {
            return Err(Error::Domain(format!(
                "covariance is singular (smallest eigenvalue {lambda_min:.3e})"
            )));
        }
        let sqrt = from_eig(&eigvecs, &eigvals.map(f64::sqrt));
        let inv_sqrt = from_eig(&eigvecs, &eigvals.map(|v| 1.0 / v.sqrt()));
        Ok(Self {
            dim,
            sigma,
            eigvecs,
            eigvals,
            sqrt,
            inv_sqrt,
        })
    }

    /// The Toeplitz correlation model: entry (i, j) is `b^{j-i}` above the
    /// diagonal and the conjugate below; the diagonal is 1, so the trace
    /// normalization holds by construction. Requires `|b| < 1`.
    pub fn toeplitz(dim: usize, b: Complex64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if b.norm() >= 1.0 {
            return Err(Error::Domain(format!(
                "Toeplitz coefficient must satisfy |b| < 1, got |b| = {}",
                b.norm()
            )));
        }
        let sigma = CMat::from_fn(dim, dim, |i, j| {
            if i <= j {
                b.powu((j - i) as u32)
            } else {
                b.powu((i - j) as u32).conj()
            }
        });
        Self::from_matrix(sigma)
    }

    /// The identity model (white observations).
    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_matrix(CMat::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> &CMat {
        &self.sigma
    }

    /// Unitary eigenvector matrix, columns ordered like [`eigvals`](Self::eigvals).
    pub fn eigvecs(&self) -> &CMat {
        &self.eigvecs
    }

    /// Eigenvalues in decreasing order.
    pub fn eigvals(&self) -> &RVec {
        &self.eigvals
    }

    pub fn sqrt(&self) -> &CMat {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &CMat {
        &self.inv_sqrt
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigvals[self.dim - 1]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigvals[0]
    }
}

/// Hermitian square root of a Hermitian PSD matrix.
///
/// Eigenvalues may dip to `-1e-10` from rounding and are clamped; anything
/// below that is a genuine PSD violation.
pub fn hermitian_sqrt(m: &CMat) -> Result<CMat> {
    let (vals, vecs) = eigh_desc(m);
    if let Some(&bad) = vals.iter().find(|&&v| v < -1e-10) {
        return Err(Error::NotPsd { eigenvalue: bad });
    }
    let clamped = vals.map(|v| v.max(0.0).sqrt());
    Ok(from_eig(&vecs, &clamped))
}

/// A batch of observations plus the whitened vectors that generated them.
/// Columns are samples.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub n: usize,
    pub dim: usize,
    /// `x_i = Σ^{1/2} w_i`, one column per sample.
    pub samples: CMat,
    /// The underlying `w_i ~ CN(0, I)`, same column order.
    pub whitened: CMat,
    pub seed: u64,
    pub stream: u64,
}

impl Dataset {
    /// Draw `n` observations from the model, stream 0.
    pub fn sample(model: &CovarianceModel, n: usize, seed: u64) -> Result<Self> {
        Self::sample_stream(model, n, seed, 0)
    }

    /// Draw `n` observations using the ChaCha stream `(seed, stream)`.
    /// Replication-level parallelism hands each replication its own stream,
    /// which keeps parallel Monte Carlo runs reproducible.
    pub fn sample_stream(
        model: &CovarianceModel,
        n: usize,
        seed: u64,
        stream: u64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("sample count must be at least 1".into()));
        }
        let dim = model.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let whitened = CMat::from_fn(dim, n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * scale, im * scale)
        });
        let samples = model.sqrt() * &whitened;
        Ok(Self {
            n,
            dim,
            samples,
            whitened,
            seed,
            stream,
        })
    }
}
