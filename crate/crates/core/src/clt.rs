//! Second-order moment matrices for the fluctuations of the scatter
//! estimator and its explicit random equivalent.
//!
//! All N²×N² matrices follow the column-stacking vec convention, under which
//! `vec(AXB) = (Bᵀ ⊗ A) vec(X)`. The base objects are the covariance `B(D)`
//! and pseudo-covariance `G(D)` of `vec(w w*) / (w* D w)`, assembled
//! blockwise from the ratio moments `beta_ij(D)`:
//!
//! * `B̃` has diagonal blocks `diag(β_{i,1}, .., β_{i,N})` and a single entry
//!   `β_{i,j}` at position (i, j) of each off-diagonal block (i, j);
//! * `G̃` has `β_{i,j}` wherever `(k = i, ℓ = j)` or `(k = j, ℓ = i)`; at the
//!   four-index overlap `i = j = k = ℓ` the two conditions describe the same
//!   moment `E|w_i|⁴/(w*Dw)²` and contribute once (the pseudo-covariance
//!   Monte Carlo oracle pins this down).
//!
//! Centering by `vec(Ξ) vec(Ξ)ᵀ` (Ξ = diag(α)) yields `B` and `G`. The
//! uncentered `B̃` also feeds the resolvent matrix `F̃` that links the two
//! central limit theorems; keeping the centered and uncentered forms apart
//! is the main trap in this module.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::limit::AsymptoticLimit;
use crate::linalg::{complexify, spectral_norm_hermitian, CMat, CVec, RMat};
use crate::model::CovarianceModel;
use crate::special::{beta_with_tol, DiagonalWeights, RatioMoments};

/// Default quadrature tolerance for the ratio moments feeding these matrices.
const MOMENT_QUAD_TOL: f64 = 1e-11;

/// The full set of moment matrices for one (model, ρ) pair.
#[derive(Debug, Clone)]
pub struct CltMoments {
    pub dim: usize,
    pub rho: f64,
    /// Covariance of vec(ww*)/(w*Dw) (centered).
    pub b: RMat,
    /// Pseudo-covariance of vec(ww*)/(w*Dw) (centered).
    pub g: RMat,
    /// Diagonal of Ξ = diag(α(D)).
    pub xi: DVector<f64>,
    /// Uncentered second moment B̃ (drives the resolvent).
    pub b_tilde: RMat,
    /// Uncentered pseudo second moment G̃.
    pub g_tilde: RMat,
    /// Covariance of √n vec(Σ̃ − Σ₀).
    pub m1_tilde: CMat,
    /// Pseudo-covariance of √n vec(Σ̃ − Σ₀).
    pub m2_tilde: CMat,
    /// The N²×N² contraction coupling the two limit theorems; spectral norm < 1.
    pub f_tilde: CMat,
    /// Covariance of √n vec(Ĉ − Σ₀).
    pub m1: CMat,
    /// Pseudo-covariance of √n vec(Ĉ − Σ₀).
    pub m2: CMat,
}

fn bg_tilde_from_beta(beta: &RMat) -> (RMat, RMat) {
    let n = beta.nrows();
    let nn = n * n;
    let mut bt = RMat::zeros(nn, nn);
    let mut gt = RMat::zeros(nn, nn);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let r = i * n + k;
                    let c = j * n + l;
                    if i == j {
                        if k == l {
                            bt[(r, c)] = beta[(i, k)];
                        }
                    } else if k == i && l == j {
                        bt[(r, c)] = beta[(i, j)];
                    }
                    if (k == i && l == j) || (k == j && l == i) {
                        gt[(r, c)] = beta[(i, j)];
                    }
                }
            }
        }
    }
    (bt, gt)
}

/// Centered covariance `B(D)`, pseudo-covariance `G(D)` and the diagonal of
/// Ξ = diag(α(D)).
pub fn covariance_bg(d: &DiagonalWeights) -> Result<(RMat, RMat, DVector<f64>)> {
    let moments = RatioMoments::compute(d, MOMENT_QUAD_TOL)?;
    let (bt, gt) = bg_tilde_from_beta(&moments.beta);
    let n = d.dim();
    let mut xi_vec = DVector::zeros(n * n);
    for i in 0..n {
        xi_vec[i * n + i] = moments.alpha[i];
    }
    let outer = &xi_vec * xi_vec.transpose();
    Ok((&bt - &outer, &gt - &outer, moments.alpha))
}

fn kron_factor(u: &CMat, diag_sqrt: &DVector<f64>) -> CMat {
    // Ū Δ^{1/2} ⊗ U Δ^{1/2} for a real diagonal Δ
    let n = u.nrows();
    let mut scaled = u.clone();
    for j in 0..n {
        let s = Complex64::new(diag_sqrt[j], 0.0);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    scaled.conjugate().kronecker(&scaled)
}

/// Covariance and pseudo-covariance of `√n vec(Σ̃ − Σ₀)`:
///
/// ```text
/// M̃₁ = N²(1-ρ)² (Ū Λ^{1/2} ⊗ U Λ^{1/2}) B(D) (Λ^{1/2}Uᵀ ⊗ Λ^{1/2}U*)
/// M̃₂ = N²(1-ρ)² (Ū Λ^{1/2} ⊗ U Λ^{1/2}) G(D) (Λ^{1/2}U* ⊗ Λ^{1/2}Uᵀ)
/// ```
pub fn clt_tilde_moments(model: &CovarianceModel, limit: &AsymptoticLimit) -> Result<(CMat, CMat)> {
    check_match(model, limit)?;
    let weights = DiagonalWeights::new(limit.d.as_slice().to_vec())?;
    let (b, g, _) = covariance_bg(&weights)?;
    let n = model.dim() as f64;
    let coeff = Complex64::new(n * n * (1.0 - limit.rho) * (1.0 - limit.rho), 0.0);
    let k = kron_factor(model.eigvecs(), &model.eigvals().map(f64::sqrt));
    let m1t = &k * complexify(&b) * k.adjoint() * coeff;
    let m2t = &k * complexify(&g) * k.transpose() * coeff;
    Ok((m1t, m2t))
}

/// The resolvent coupling matrix
/// `F̃ = N(1-ρ) (Ū D^{1/2} ⊗ U D^{1/2}) B̃(D) (D^{1/2}Uᵀ ⊗ D^{1/2}U*)`,
/// built on the *uncentered* B̃.
pub fn f_tilde(model: &CovarianceModel, limit: &AsymptoticLimit) -> Result<CMat> {
    check_match(model, limit)?;
    let weights = DiagonalWeights::new(limit.d.as_slice().to_vec())?;
    let beta = beta_with_tol(&weights, MOMENT_QUAD_TOL)?;
    let (bt, _) = bg_tilde_from_beta(&beta);
    let n = model.dim() as f64;
    let coeff = Complex64::new(n * (1.0 - limit.rho), 0.0);
    let k = kron_factor(model.eigvecs(), &limit.d.map(f64::sqrt));
    Ok(&k * complexify(&bt) * k.adjoint() * coeff)
}

fn check_match(model: &CovarianceModel, limit: &AsymptoticLimit) -> Result<()> {
    if model.dim() != limit.dim() {
        return Err(Error::Domain(format!(
            "model dimension {} does not match limit dimension {}",
            model.dim(),
            limit.dim()
        )));
    }
    Ok(())
}

fn resolvent(f: &CMat) -> Result<CMat> {
    let nn = f.nrows();
    let norm = spectral_norm_hermitian(f);
    if norm >= 1.0 - 1e-6 {
        return Err(Error::IllConditionedResolvent(format!(
            "‖F̃‖ = {norm} too close to 1"
        )));
    }
    let a = CMat::identity(nn, nn) - f;
    let a_norm = a.norm();
    let inv = a
        .try_inverse()
        .ok_or_else(|| Error::IllConditionedResolvent("I − F̃ is singular".into()))?;
    let cond = a_norm * inv.norm();
    if cond > 1e10 {
        return Err(Error::IllConditionedResolvent(format!(
            "condition estimate {cond:.3e} exceeds 1e10"
        )));
    }
    Ok(inv)
}

/// Covariance and pseudo-covariance of `√n vec(Ĉ − Σ₀)`, obtained from the
/// tilde moments through the resolvent `(I − F̃)^{-1}` conjugated by
/// `Σ₀^{±1/2}` Kronecker factors.
pub fn clt_full_moments(model: &CovarianceModel, limit: &AsymptoticLimit) -> Result<(CMat, CMat)> {
    let (m1t, m2t) = clt_tilde_moments(model, limit)?;
    let f = f_tilde(model, limit)?;
    full_from_parts(limit, &m1t, &m2t, &f)
}

fn full_from_parts(
    limit: &AsymptoticLimit,
    m1t: &CMat,
    m2t: &CMat,
    f: &CMat,
) -> Result<(CMat, CMat)> {
    let r = resolvent(f)?;
    let sh = limit.sigma0_sqrt();
    let smh = limit.sigma0_inv_sqrt();
    let p = sh.transpose().kronecker(&sh);
    let pm = smh.transpose().kronecker(&smh);
    let t = &p * &r * &pm;
    let m1 = &t * m1t * (&pm * &r * &p);

    let r_t = resolvent(&f.transpose())?;
    let right = smh.kronecker(&smh.transpose()) * r_t * sh.kronecker(&sh.transpose());
    let m2 = &t * m2t * right;
    Ok((m1, m2))
}

impl CltMoments {
    /// Assemble every moment matrix for one (model, limit) pair, sharing the
    /// ratio-moment quadratures across the pieces.
    pub fn compute(model: &CovarianceModel, limit: &AsymptoticLimit) -> Result<Self> {
        check_match(model, limit)?;
        let dim = model.dim();
        let nf = dim as f64;
        let rho = limit.rho;
        let weights = DiagonalWeights::new(limit.d.as_slice().to_vec())?;
        let moments = RatioMoments::compute(&weights, MOMENT_QUAD_TOL)?;
        let (b_tilde, g_tilde) = bg_tilde_from_beta(&moments.beta);
        let mut xi_vec = DVector::zeros(dim * dim);
        for i in 0..dim {
            xi_vec[i * dim + i] = moments.alpha[i];
        }
        let outer = &xi_vec * xi_vec.transpose();
        let b = &b_tilde - &outer;
        let g = &g_tilde - &outer;

        let k_lambda = kron_factor(model.eigvecs(), &model.eigvals().map(f64::sqrt));
        let coeff2 = Complex64::new(nf * nf * (1.0 - rho) * (1.0 - rho), 0.0);
        let m1_tilde = &k_lambda * complexify(&b) * k_lambda.adjoint() * coeff2;
        let m2_tilde = &k_lambda * complexify(&g) * k_lambda.transpose() * coeff2;

        let k_d = kron_factor(model.eigvecs(), &limit.d.map(f64::sqrt));
        let coeff1 = Complex64::new(nf * (1.0 - rho), 0.0);
        let f_tilde = &k_d * complexify(&b_tilde) * k_d.adjoint() * coeff1;

        let (m1, m2) = full_from_parts(limit, &m1_tilde, &m2_tilde, &f_tilde)?;

        Ok(Self {
            dim,
            rho,
            b,
            g,
            xi: moments.alpha,
            b_tilde,
            g_tilde,
            m1_tilde,
            m2_tilde,
            f_tilde,
            m1,
            m2,
        })
    }
}

/// Asymptotic variance of `√n ((1/N) p* Ĉ^{-1} p − (1/N) p* Σ₀^{-1} p)` for a
/// unit-norm direction `p`:
///
/// ```text
/// (1/N²) a* M₁ a,   a = (Σ₀^{-1})ᵀ p̄ ⊗ Σ₀^{-1} p
/// ```
pub fn quadratic_form_variance(
    p: &CVec,
    limit: &AsymptoticLimit,
    moments: &CltMoments,
) -> Result<f64> {
    let dim = limit.dim();
    if p.len() != dim {
        return Err(Error::Domain(format!(
            "direction length {} does not match dimension {dim}",
            p.len()
        )));
    }
    if (p.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "direction must have unit norm, got ‖p‖ = {}",
            p.norm()
        )));
    }
    let s0_inv = limit.sigma0_inv();
    let u = &s0_inv * p;
    let u_conj = CMat::from_fn(dim, 1, |i, _| u[i].conj());
    let u_mat = CMat::from_fn(dim, 1, |i, _| u[i]);
    let a = u_conj.kronecker(&u_mat);
    let quad = (a.adjoint() * &moments.m1 * &a)[(0, 0)];
    Ok(quad.re / (dim as f64 * dim as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::sigma_zero;
    use crate::linalg::vec_col;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_cmat(n: usize, rng: &mut ChaCha8Rng) -> CMat {
        CMat::from_fn(n, n, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn vec_kronecker_ordering_self_test() {
        // vec(AXB) = (Bᵀ ⊗ A) vec(X) — the single most error-prone
        // convention here; everything downstream leans on it.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let a = random_cmat(3, &mut rng);
            let x = random_cmat(3, &mut rng);
            let b = random_cmat(3, &mut rng);
            let lhs = vec_col(&(&a * &x * &b));
            let rhs = b.transpose().kronecker(&a) * vec_col(&x);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn covariance_bg_uniform_weights() {
        // d = (1,1): beta_ii = 1/3, beta_ij = 1/6, alpha_i = 1/2.
        let d = DiagonalWeights::new(vec![1.0, 1.0]).unwrap();
        let (b, g, xi) = covariance_bg(&d).unwrap();
        assert_relative_eq!(xi[0], 0.5, epsilon = 1e-9);
        // B[0,0] = 1/3 - 1/4 = 1/12
        assert_relative_eq!(b[(0, 0)], 1.0 / 12.0, epsilon = 1e-9);
        // diagonal block carries beta_01 on its diagonal: B[1,1] = 1/6
        assert_relative_eq!(b[(1, 1)], 1.0 / 6.0, epsilon = 1e-9);
        // off-diagonal block entry lands at (0,3) and is centered:
        // beta_01 - alpha_0 alpha_1 = 1/6 - 1/4
        assert_relative_eq!(b[(0, 3)], 1.0 / 6.0 - 0.25, epsilon = 1e-9);
        // G at the overlap (i=j=k=l) carries beta_ii once
        assert_relative_eq!(g[(0, 0)] + 0.25, 1.0 / 3.0, epsilon = 1e-9);
        // G symmetric
        assert!((&g - g.transpose()).norm() < 1e-12);
    }

    #[test]
    fn b_is_symmetric_psd() {
        let d = DiagonalWeights::new(vec![1.3, 0.4, 2.0]).unwrap();
        let (b, _, _) = covariance_bg(&d).unwrap();
        assert!((&b - b.transpose()).norm() < 1e-12);
        let eig = b.symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&v| v > -1e-8));
    }

    #[test]
    fn mc_oracle_for_b_and_g() {
        // Monte Carlo covariance/pseudo-covariance of vec(ww*)/(w*Dw),
        // five random weight sets, 10^6 draws, 4 standard errors.
        use rand_distr::StandardNormal;
        let mut seed_rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..5 {
            let d: Vec<f64> = (0..2)
                .map(|_| 10f64.powf(seed_rng.random_range(-1.0..1.0)))
                .collect();
            let dw = DiagonalWeights::new(d.clone()).unwrap();
            let (b, g, _) = covariance_bg(&dw).unwrap();

            let draws = 1_000_000usize;
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
            let scale = std::f64::consts::FRAC_1_SQRT_2;
            let mut mean = [Complex64::new(0.0, 0.0); 4];
            let mut prod_conj = [[Complex64::new(0.0, 0.0); 4]; 4];
            let mut prod_plain = [[Complex64::new(0.0, 0.0); 4]; 4];
            let mut m2_conj = [[0.0f64; 4]; 4];
            let mut m2_plain = [[0.0f64; 4]; 4];
            for _ in 0..draws {
                let w0 = c(rng.sample(StandardNormal), rng.sample(StandardNormal)) * scale;
                let w1 = c(rng.sample(StandardNormal), rng.sample(StandardNormal)) * scale;
                let q = d[0] * w0.norm_sqr() + d[1] * w1.norm_sqr();
                // vec(ww*) = [|w0|², w1 w̄0, w0 w̄1, |w1|²] / q
                let y = [
                    c(w0.norm_sqr(), 0.0) / q,
                    w1 * w0.conj() / q,
                    w0 * w1.conj() / q,
                    c(w1.norm_sqr(), 0.0) / q,
                ];
                for a in 0..4 {
                    mean[a] += y[a];
                    for bidx in 0..4 {
                        let pc = y[a] * y[bidx].conj();
                        let pp = y[a] * y[bidx];
                        prod_conj[a][bidx] += pc;
                        prod_plain[a][bidx] += pp;
                        m2_conj[a][bidx] += pc.norm_sqr();
                        m2_plain[a][bidx] += pp.norm_sqr();
                    }
                }
            }
            let nf = draws as f64;
            for m in mean.iter_mut() {
                *m /= nf;
            }
            for a in 0..4 {
                for bi in 0..4 {
                    let cov = prod_conj[a][bi] / nf - mean[a] * mean[bi].conj();
                    let pcov = prod_plain[a][bi] / nf - mean[a] * mean[bi];
                    let se_c = ((m2_conj[a][bi] / nf
                        - (prod_conj[a][bi] / nf).norm_sqr())
                        / nf)
                        .max(0.0)
                        .sqrt();
                    let se_p = ((m2_plain[a][bi] / nf
                        - (prod_plain[a][bi] / nf).norm_sqr())
                        / nf)
                        .max(0.0)
                        .sqrt();
                    let dev_b = (cov - c(b[(a, bi)], 0.0)).norm();
                    let dev_g = (pcov - c(g[(a, bi)], 0.0)).norm();
                    assert!(
                        dev_b <= 4.0 * se_c + 1e-9,
                        "B[{a},{bi}] dev {dev_b:.2e} > 4 SE {:.2e} (trial {trial})",
                        4.0 * se_c
                    );
                    assert!(
                        dev_g <= 4.0 * se_p + 1e-9,
                        "G[{a},{bi}] dev {dev_g:.2e} > 4 SE {:.2e} (trial {trial})",
                        4.0 * se_p
                    );
                }
            }
        }
    }

    #[test]
    fn tilde_moments_identity_model() {
        // U = I, Λ = I, D = I ⇒ M̃₁ = N²(1-ρ)² B(I)
        let m = CovarianceModel::identity(2).unwrap();
        let lim = sigma_zero(&m, 0.3, 1e-10).unwrap();
        let (m1t, _) = clt_tilde_moments(&m, &lim).unwrap();
        let d = DiagonalWeights::new(vec![1.0, 1.0]).unwrap();
        let (b, _, _) = covariance_bg(&d).unwrap();
        let expect = complexify(&b) * c(4.0 * 0.49, 0.0);
        assert!((m1t - expect).norm() < 1e-7);
    }

    #[test]
    fn everything_vanishes_at_rho_one() {
        let m = CovarianceModel::toeplitz(2, c(0.7, 0.0)).unwrap();
        let lim = sigma_zero(&m, 1.0, 1e-10).unwrap();
        let moments = CltMoments::compute(&m, &lim).unwrap();
        assert!(moments.m1_tilde.norm() < 1e-12);
        assert!(moments.m2_tilde.norm() < 1e-12);
        assert!(moments.f_tilde.norm() < 1e-12);
        assert!(moments.m1.norm() < 1e-12);
        assert!(moments.m2.norm() < 1e-12);
        let p = CVec::from_element(2, c(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        assert!(quadratic_form_variance(&p, &lim, &moments).unwrap().abs() < 1e-14);
    }

    #[test]
    fn f_tilde_identity_model_row_action() {
        // At Σ = I: F̃ = N(1-ρ) B̃(I) and F̃ vec(I) = (1-ρ) vec(I).
        let m = CovarianceModel::identity(3).unwrap();
        let rho = 0.4;
        let lim = sigma_zero(&m, rho, 1e-10).unwrap();
        let f = f_tilde(&m, &lim).unwrap();
        let vec_i = vec_col(&CMat::identity(3, 3));
        let acted = &f * &vec_i;
        let expect = vec_i * c(1.0 - rho, 0.0);
        assert!((acted - expect).norm() < 1e-8);
    }

    #[test]
    fn f_tilde_spectral_norm_below_one() {
        for (dim, b, rho) in [(2, c(0.7, 0.0), 0.05), (3, c(0.0, 0.7), 0.5), (4, c(0.5, 0.3), 0.9)] {
            let m = CovarianceModel::toeplitz(dim, b).unwrap();
            let lim = sigma_zero(&m, rho, 1e-9).unwrap();
            let f = f_tilde(&m, &lim).unwrap();
            let norm = spectral_norm_hermitian(&f);
            assert!(norm < 1.0, "‖F̃‖ = {norm} at dim {dim}, rho {rho}");
        }
    }

    #[test]
    fn m1_hermitian_psd_and_m2_symmetric() {
        let m = CovarianceModel::toeplitz(3, c(0.0, 0.7)).unwrap();
        let lim = sigma_zero(&m, 0.5, 1e-9).unwrap();
        let moments = CltMoments::compute(&m, &lim).unwrap();
        assert!((&moments.m1 - moments.m1.adjoint()).norm() < 1e-8);
        assert!((&moments.m1_tilde - moments.m1_tilde.adjoint()).norm() < 1e-8);
        let eig = crate::linalg::hermitize(&moments.m1).symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&v| v > -1e-8));
        assert!((&moments.m2 - moments.m2.transpose()).norm() < 1e-8);
    }

    #[test]
    fn full_moments_consistency_chain_at_identity() {
        // At Σ = I the Σ₀^{±1/2} Kronecker factors are exact identities, so
        // M₁ must equal (I − F̃)^{-1} M̃₁ (I − F̃)^{-1} bit for bit.
        let m = CovarianceModel::identity(2).unwrap();
        let lim = sigma_zero(&m, 0.5, 1e-10).unwrap();
        let moments = CltMoments::compute(&m, &lim).unwrap();
        let r = (CMat::identity(4, 4) - &moments.f_tilde)
            .try_inverse()
            .unwrap();
        let direct = &r * &moments.m1_tilde * &r;
        assert_eq!(moments.m1.as_slice(), direct.as_slice());
    }

    #[test]
    fn quadratic_form_variance_is_real_nonnegative() {
        let m = CovarianceModel::toeplitz(4, c(0.0, 0.7)).unwrap();
        let lim = sigma_zero(&m, 0.5, 1e-9).unwrap();
        let moments = CltMoments::compute(&m, &lim).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let mut p = CVec::from_fn(4, |_, _| {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            p /= c(p.norm(), 0.0);
            let v = quadratic_form_variance(&p, &lim, &moments).unwrap();
            assert!(v >= -1e-12, "variance {v} negative");
        }
        // non-unit p rejected
        let p = CVec::from_element(4, c(1.0, 0.0));
        assert!(quadratic_form_variance(&p, &lim, &moments).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn g_tilde_overlap_matches_beta_once(
            raw in proptest::collection::vec(-0.6f64..0.6, 2..4),
        ) {
            let d: Vec<f64> = raw.iter().map(|r| 10f64.powf(*r)).collect();
            let n = d.len();
            let dw = DiagonalWeights::new(d).unwrap();
            let beta = beta_with_tol(&dw, 1e-10).unwrap();
            let (_, gt) = bg_tilde_from_beta(&beta);
            for i in 0..n {
                let idx = i * n + i;
                prop_assert!((gt[(idx, idx)] - beta[(i, i)]).abs() < 1e-12);
            }
        }
    }
}
