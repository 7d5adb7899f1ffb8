//! Monte Carlo harness: regime-accuracy metrics, bias curves, and
//! Kolmogorov-Smirnov validation of the central limit theorem.
//!
//! Replications are distributed across threads with one ChaCha stream per
//! replication derived from `(seed, replication index)`, and reductions walk
//! the collected per-replication values in index order, so every estimate is
//! reproducible bit-for-bit regardless of thread scheduling.

use nalgebra::Cholesky;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clt::{quadratic_form_variance, CltMoments};
use crate::error::{Error, Result};
use crate::limit::{asymptotic_bias, sigma_zero};
use crate::linalg::{CMat, CVec};
use crate::model::{CovarianceModel, Dataset};
use crate::rte::{s_hat, sigma_tilde, solve_rte};

/// Default iteration cap for the scatter solver inside experiment cells.
const SOLVER_MAX_ITER: usize = 500;

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricEstimate {
    pub value: f64,
    pub std_err: f64,
}

fn mean_and_se(values: &[f64]) -> MetricEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return MetricEstimate {
            value: mean,
            std_err: 0.0,
        };
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    MetricEstimate {
        value: mean,
        std_err: (var / n).sqrt(),
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Kolmogorov-Smirnov distance between the empirical distribution of the
/// samples and the standard normal, evaluated exactly at the order
/// statistics.
pub fn ks_normal(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("KS statistic needs at least one sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = normal_cdf(x);
        d = d.max(cdf - i as f64 / n);
        d = d.max((i as f64 + 1.0) / n - cdf);
    }
    Ok(d)
}

/// The two regime-accuracy metrics of the random-equivalent comparison:
/// `E_n = (1/N) E‖Ĉ − Σ̃‖²_Fro` and `E_nN = (1/N) E‖Ĉ − Ŝ‖²_Fro`, estimated
/// on the same datasets (the three estimators see identical randomness
/// within a replication).
pub fn metric_regime(
    model: &CovarianceModel,
    rho: f64,
    n: usize,
    replications: usize,
    seed: u64,
    tol: f64,
) -> Result<(MetricEstimate, MetricEstimate)> {
    let limit = sigma_zero(model, rho, 1e-9)?;
    let dim = model.dim() as f64;
    let per_rep: Vec<(f64, f64)> = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<(f64, f64)> {
            let ds = Dataset::sample_stream(model, n, seed, rep as u64)?;
            let est = solve_rte(&ds.samples, rho, tol, SOLVER_MAX_ITER)?;
            let tilde = sigma_tilde(&ds.samples, &limit)?;
            let hat_s = s_hat(&ds.samples, model, rho)?;
            let e_n = (&est.matrix - tilde).norm_squared() / dim;
            let e_nn = (&est.matrix - hat_s).norm_squared() / dim;
            Ok((e_n, e_nn))
        })
        .collect::<Result<Vec<_>>>()?;
    let e_n: Vec<f64> = per_rep.iter().map(|p| p.0).collect();
    let e_nn: Vec<f64> = per_rep.iter().map(|p| p.1).collect();
    Ok((mean_and_se(&e_n), mean_and_se(&e_nn)))
}

/// Monte Carlo estimate of the scale-normalized bias
/// `‖E[(N/tr(Σ⁻¹Ĉ)) Σ⁻¹Ĉ] − I‖²_Fro / N`: the normalized matrix is averaged
/// over replications first, then the squared deviation is taken. The
/// standard error comes from first-order propagation of the entrywise
/// replication variance through the squared norm.
pub fn empirical_bias(
    model: &CovarianceModel,
    rho: f64,
    n: usize,
    replications: usize,
    seed: u64,
    tol: f64,
) -> Result<MetricEstimate> {
    let dim = model.dim();
    let sigma_inv = crate::linalg::from_eig(model.eigvecs(), &model.eigvals().map(|v| 1.0 / v));
    let mats: Vec<CMat> = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<CMat> {
            let ds = Dataset::sample_stream(model, n, seed, rep as u64)?;
            let est = solve_rte(&ds.samples, rho, tol, SOLVER_MAX_ITER)?;
            let normalized = &sigma_inv * est.matrix;
            let trace: f64 = normalized.diagonal().iter().map(|z| z.re).sum();
            Ok(normalized * Complex64::new(dim as f64 / trace, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;

    let reps = replications as f64;
    let mut mean = CMat::zeros(dim, dim);
    for m in &mats {
        mean += m;
    }
    mean /= Complex64::new(reps, 0.0);

    let delta = &mean - CMat::identity(dim, dim);
    let bias = delta.norm_squared() / dim as f64;

    // delta-method SE: d bias / d m̄_e = 2 Δ_e / N on real and imaginary parts
    let mut var = 0.0;
    if replications > 1 {
        for i in 0..dim {
            for j in 0..dim {
                let (mut var_re, mut var_im) = (0.0, 0.0);
                for m in &mats {
                    let d = m[(i, j)] - mean[(i, j)];
                    var_re += d.re * d.re;
                    var_im += d.im * d.im;
                }
                var_re /= reps - 1.0;
                var_im /= reps - 1.0;
                let g = 2.0 / dim as f64;
                var += (g * delta[(i, j)].re).powi(2) * var_re / reps
                    + (g * delta[(i, j)].im).powi(2) * var_im / reps;
            }
        }
    }
    Ok(MetricEstimate {
        value: bias,
        std_err: var.sqrt(),
    })
}

/// Draw the studentized quadratic-form statistic
/// `T = √n ((1/N) p*Ĉ^{-1}p − (1/N) p*Σ₀^{-1}p) / √v` once per replication.
/// `p` is normalized to unit norm before use.
pub fn clt_t_sample(
    model: &CovarianceModel,
    rho: f64,
    n: usize,
    p: &CVec,
    replications: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<f64>> {
    if rho >= 1.0 {
        return Err(Error::Domain(
            "the statistic is degenerate at rho = 1 (zero variance)".into(),
        ));
    }
    let dim = model.dim();
    if p.len() != dim {
        return Err(Error::Domain(format!(
            "direction length {} does not match dimension {dim}",
            p.len()
        )));
    }
    let norm = p.norm();
    if norm == 0.0 {
        return Err(Error::Domain("direction must be nonzero".into()));
    }
    let p = p / Complex64::new(norm, 0.0);
    let limit = sigma_zero(model, rho, 1e-9)?;
    let moments = CltMoments::compute(model, &limit)?;
    let variance = quadratic_form_variance(&p, &limit, &moments)?;
    if variance <= 0.0 {
        return Err(Error::Domain(format!(
            "quadratic-form variance {variance} is not positive"
        )));
    }
    let base = (p.adjoint() * limit.sigma0_inv() * &p)[(0, 0)].re / dim as f64;
    let scale = (n as f64).sqrt() / variance.sqrt();

    (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let ds = Dataset::sample_stream(model, n, seed, rep as u64)?;
            let est = solve_rte(&ds.samples, rho, tol, SOLVER_MAX_ITER)?;
            let chol = Cholesky::new(est.matrix)
                .ok_or_else(|| Error::Domain("estimate lost positive definiteness".into()))?;
            let solved = chol.solve(&p);
            let q = (p.adjoint() * solved)[(0, 0)].re / dim as f64;
            Ok(scale * (q - base))
        })
        .collect()
}

/// KS distance of the studentized statistic sample against the standard
/// normal.
pub fn clt_ks_experiment(
    model: &CovarianceModel,
    rho: f64,
    n: usize,
    p: &CVec,
    replications: usize,
    seed: u64,
    tol: f64,
) -> Result<f64> {
    let sample = clt_t_sample(model, rho, n, p, replications, seed, tol)?;
    ks_normal(&sample)
}

/// Which experiment a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Bias,
    RegimeCompare,
    CltKs,
    MomentsCheck,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Bias => "bias",
            ExperimentKind::RegimeCompare => "regime-compare",
            ExperimentKind::CltKs => "clt-ks",
            ExperimentKind::MomentsCheck => "moments-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One experiment grid: every `(rho, b or n)` combination becomes a cell.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub dim: usize,
    /// Toeplitz coefficients; the bias experiment sweeps this list, the
    /// others use the first entry.
    pub b: Vec<Complex64>,
    pub rho: Vec<f64>,
    /// Sample sizes; the bias experiment uses the first entry, the others
    /// sweep this list.
    pub n: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    /// Solver tolerance for the scatter fixed point.
    pub tol: f64,
    /// Floor on admissible rho values for sweeps.
    pub kappa: f64,
    pub out: Option<String>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if self.replications == 0 {
            return Err(Error::Domain("replications must be at least 1".into()));
        }
        if self.tol <= 0.0 || self.tol.is_nan() {
            return Err(Error::Domain("tolerance must be positive".into()));
        }
        for &b in &self.b {
            if b.norm() >= 1.0 {
                return Err(Error::Domain(format!("|b| must be < 1, got {}", b.norm())));
            }
        }
        for &rho in &self.rho {
            if !(rho > self.kappa && rho <= 1.0) {
                return Err(Error::Domain(format!(
                    "rho = {rho} outside ({}, 1]",
                    self.kappa
                )));
            }
            for &n in &self.n {
                let lower = (1.0 - n as f64 / self.dim as f64).max(0.0);
                if rho <= lower {
                    return Err(Error::Domain(format!(
                        "(n = {n}, rho = {rho}) inadmissible: rho must exceed {lower}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One output row of an experiment run.
#[derive(Debug, Clone, Serialize)]
pub struct CellRecord {
    pub kind: &'static str,
    pub series: String,
    /// Plot abscissa: b for bias, n/N for regime comparison, n for the rest.
    pub x: f64,
    pub value: f64,
    pub std_err: Option<f64>,
    pub dim: usize,
    pub b: Complex64,
    pub rho: f64,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    pub status: &'static str,
    pub message: String,
    /// Wall-clock time for the cell; excluded from CSV so report bodies stay
    /// byte-identical across reruns.
    pub runtime_ms: u128,
}

/// A full experiment report: config echo plus one record per (cell, series).
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub format_version: u32,
    pub config: ExperimentConfig,
    pub cells: Vec<CellRecord>,
}

impl ExperimentReport {
    pub fn has_failures(&self) -> bool {
        self.cells.iter().any(|c| c.status != "ok")
    }

    /// CSV rendering: a comment header carrying the config as JSON, then one
    /// plot-ready row per record.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# format_version: {}\n", self.format_version));
        out.push_str(&format!(
            "# config: {}\n",
            serde_json::to_string(&self.config).expect("config serializes")
        ));
        out.push_str("kind,series,x,y,std_err,dim,b_re,b_im,rho,n,reps,seed,status,message\n");
        for c in &self.cells {
            let se = c.std_err.map_or(String::new(), |s| format!("{s}"));
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                c.kind,
                c.series,
                c.x,
                c.value,
                se,
                c.dim,
                c.b.re,
                c.b.im,
                c.rho,
                c.n,
                c.replications,
                c.seed,
                c.status,
                c.message.replace(',', ";"),
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render(&self) -> String {
        match self.config.format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

struct CellOutput {
    series: String,
    x: f64,
    value: f64,
    std_err: Option<f64>,
}

fn run_cell(
    config: &ExperimentConfig,
    model: &CovarianceModel,
    rho: f64,
    n: usize,
) -> Result<Vec<CellOutput>> {
    match config.kind {
        ExperimentKind::Bias => {
            let b_mag = model.sigma()[(0, 1.min(model.dim() - 1))].norm();
            let asym = asymptotic_bias(model, rho)?;
            let emp = empirical_bias(model, rho, n, config.replications, config.seed, config.tol)?;
            Ok(vec![
                CellOutput {
                    series: "asymptotic_bias".into(),
                    x: b_mag,
                    value: asym,
                    std_err: None,
                },
                CellOutput {
                    series: "empirical_bias".into(),
                    x: b_mag,
                    value: emp.value,
                    std_err: Some(emp.std_err),
                },
            ])
        }
        ExperimentKind::RegimeCompare => {
            let (e_n, e_nn) =
                metric_regime(model, rho, n, config.replications, config.seed, config.tol)?;
            let ratio = n as f64 / config.dim as f64;
            Ok(vec![
                CellOutput {
                    series: "E_n".into(),
                    x: ratio,
                    value: e_n.value,
                    std_err: Some(e_n.std_err),
                },
                CellOutput {
                    series: "E_nN".into(),
                    x: ratio,
                    value: e_nn.value,
                    std_err: Some(e_nn.std_err),
                },
            ])
        }
        ExperimentKind::CltKs => {
            let p = CVec::from_element(
                config.dim,
                Complex64::new(1.0 / (config.dim as f64).sqrt(), 0.0),
            );
            let ks = clt_ks_experiment(
                model,
                rho,
                n,
                &p,
                config.replications,
                config.seed,
                config.tol,
            )?;
            Ok(vec![CellOutput {
                series: "ks".into(),
                x: n as f64,
                value: ks,
                std_err: None,
            }])
        }
        ExperimentKind::MomentsCheck => {
            let (m1_err, m1t_err) = moments_check(
                model,
                rho,
                n,
                config.replications,
                config.seed,
                config.tol,
            )?;
            Ok(vec![
                CellOutput {
                    series: "m1_rel_err".into(),
                    x: n as f64,
                    value: m1_err,
                    std_err: None,
                },
                CellOutput {
                    series: "m1_tilde_rel_err".into(),
                    x: n as f64,
                    value: m1t_err,
                    std_err: None,
                },
            ])
        }
    }
}

/// Relative Frobenius error between the predicted covariances (M₁, M̃₁) and
/// the empirical covariances of `√n vec(Ĉ − Σ₀)` and `√n vec(Σ̃ − Σ₀)`, on
/// shared datasets.
pub fn moments_check(
    model: &CovarianceModel,
    rho: f64,
    n: usize,
    replications: usize,
    seed: u64,
    tol: f64,
) -> Result<(f64, f64)> {
    let limit = sigma_zero(model, rho, 1e-9)?;
    let moments = CltMoments::compute(model, &limit)?;
    let dim = model.dim();
    let nn = dim * dim;
    let sqrt_n = (n as f64).sqrt();

    let deviations: Vec<(CVec, CVec)> = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<(CVec, CVec)> {
            let ds = Dataset::sample_stream(model, n, seed, rep as u64)?;
            let est = solve_rte(&ds.samples, rho, tol, SOLVER_MAX_ITER)?;
            let tilde = sigma_tilde(&ds.samples, &limit)?;
            let dh = (est.matrix - &limit.sigma0) * Complex64::new(sqrt_n, 0.0);
            let dt = (tilde - &limit.sigma0) * Complex64::new(sqrt_n, 0.0);
            Ok((crate::linalg::vec_col(&dh), crate::linalg::vec_col(&dt)))
        })
        .collect::<Result<Vec<_>>>()?;

    let reps = replications as f64;
    let mut cov_hat = CMat::zeros(nn, nn);
    let mut cov_tilde = CMat::zeros(nn, nn);
    for (dh, dt) in &deviations {
        cov_hat += dh * dh.adjoint();
        cov_tilde += dt * dt.adjoint();
    }
    cov_hat /= Complex64::new(reps, 0.0);
    cov_tilde /= Complex64::new(reps, 0.0);

    let m1_err = (&cov_hat - &moments.m1).norm() / moments.m1.norm();
    let m1t_err = (&cov_tilde - &moments.m1_tilde).norm() / moments.m1_tilde.norm();
    Ok((m1_err, m1t_err))
}

/// Run the full grid of an experiment config. Cell failures are recorded and
/// do not abort the run; config-level problems fail fast.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut cells = Vec::new();

    let (b_grid, n_grid): (Vec<Complex64>, Vec<usize>) = match config.kind {
        ExperimentKind::Bias => (config.b.clone(), config.n.iter().take(1).cloned().collect()),
        _ => (
            config.b.iter().take(1).cloned().collect(),
            config.n.clone(),
        ),
    };

    for &rho in &config.rho {
        for &b in &b_grid {
            let model = CovarianceModel::toeplitz(config.dim, b)?;
            for &n in &n_grid {
                let start = std::time::Instant::now();
                let outcome = run_cell(config, &model, rho, n);
                let runtime_ms = start.elapsed().as_millis();
                match outcome {
                    Ok(outputs) => {
                        for o in outputs {
                            cells.push(CellRecord {
                                kind: config.kind.as_str(),
                                series: o.series,
                                x: o.x,
                                value: o.value,
                                std_err: o.std_err,
                                dim: config.dim,
                                b,
                                rho,
                                n,
                                replications: config.replications,
                                seed: config.seed,
                                status: "ok",
                                message: String::new(),
                                runtime_ms,
                            });
                        }
                    }
                    Err(err) => {
                        cells.push(CellRecord {
                            kind: config.kind.as_str(),
                            series: "error".into(),
                            x: f64::NAN,
                            value: f64::NAN,
                            std_err: None,
                            dim: config.dim,
                            b,
                            rho,
                            n,
                            replications: config.replications,
                            seed: config.seed,
                            status: "error",
                            message: err.to_string(),
                            runtime_ms,
                        });
                    }
                }
            }
        }
    }

    Ok(ExperimentReport {
        format_version: 1,
        config: config.clone(),
        cells,
    })
}
