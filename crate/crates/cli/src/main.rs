//! `rte` — regularized Tyler scatter estimation from the command line.
//!
//! Subcommands: `estimate` (solve the fixed point on a data file), `limit`
//! (large-sample limit and bias for a model), `moments` (CLT moment
//! matrices), and the Monte Carlo experiments `bias`, `regime-compare`,
//! `clt-ks`, `moments-check`.
//!
//! Exit codes: 0 on success, 1 if any experiment cell failed, 2 on
//! configuration or input errors.

use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use rte_core::clt::CltMoments;
use rte_core::experiments::{self, ExperimentConfig, ExperimentKind, OutputFormat};
use rte_core::limit::{asymptotic_bias, sigma_zero};
use rte_core::linalg::CMat;
use rte_core::model::CovarianceModel;
use rte_core::rte::solve_rte;

/// Toeplitz coefficient: real (`0.7`) or purely imaginary (`0.7j`).
#[derive(Debug, Clone, Copy)]
struct BCoeff(Complex64);

impl FromStr for BCoeff {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Some(imag) = t.strip_suffix(['j', 'i']) {
            let v: f64 = imag
                .parse()
                .map_err(|_| format!("invalid imaginary coefficient `{s}`"))?;
            Ok(BCoeff(Complex64::new(0.0, v)))
        } else {
            let v: f64 = t
                .parse()
                .map_err(|_| format!("invalid coefficient `{s}`"))?;
            Ok(BCoeff(Complex64::new(v, 0.0)))
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Observation dimension N.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Toeplitz coefficient(s); repeatable for bias sweeps. Accepts `0.5` or `0.7j`.
    #[arg(long = "b", default_value = "0.5")]
    b: Vec<BCoeff>,
    /// Regularization parameter(s); repeatable.
    #[arg(long = "rho", default_value = "0.5")]
    rho: Vec<f64>,
}

#[derive(Debug, Args)]
struct McArgs {
    /// Sample size(s) n; repeatable.
    #[arg(long = "n")]
    n: Vec<usize>,
    /// Sample sizes as n/N ratios; repeatable, appended to --n after scaling by dim.
    #[arg(long = "ratio")]
    ratio: Vec<usize>,
    /// Monte Carlo replications per cell.
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    /// Base RNG seed; replication r uses stream (seed, r).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Admissibility floor on rho for sweeps.
    #[arg(long, default_value_t = 0.05)]
    kappa: f64,
}

#[derive(Debug, Args)]
struct IoArgs {
    /// Solver tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Parser)]
#[command(name = "rte", version, about = "Regularized Tyler estimation of scatter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the scatter fixed point on samples read from a file.
    Estimate {
        /// Input file: one row per sample, comma-separated interleaved
        /// real/imaginary parts (2N columns).
        #[arg(long)]
        input: String,
        /// Regularization parameter.
        #[arg(long)]
        rho: f64,
        /// Expected dimension; inferred from the file when omitted.
        #[arg(long)]
        dim: Option<usize>,
        /// Iteration cap.
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Print the large-sample limit Σ₀(ρ) and the asymptotic bias.
    Limit {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Emit the CLT moment matrices M₁, M₂ and F̃.
    Moments {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Monte Carlo bias curve over the Toeplitz coefficient grid.
    Bias {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Accuracy comparison of the two random equivalents.
    RegimeCompare {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Kolmogorov-Smirnov validation of the studentized quadratic form.
    CltKs {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Compare predicted CLT covariances against empirical ones.
    MomentsCheck {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        io: IoArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Estimate {
            input,
            rho,
            dim,
            max_iter,
            io,
        } => estimate(&input, rho, dim, max_iter, &io),
        Command::Limit { model, io } => limit_cmd(&model, &io),
        Command::Moments { model, io } => moments_cmd(&model, &io),
        Command::Bias { model, mc, io } => experiment(ExperimentKind::Bias, &model, &mc, &io),
        Command::RegimeCompare { model, mc, io } => {
            experiment(ExperimentKind::RegimeCompare, &model, &mc, &io)
        }
        Command::CltKs { model, mc, io } => experiment(ExperimentKind::CltKs, &model, &mc, &io),
        Command::MomentsCheck { model, mc, io } => {
            experiment(ExperimentKind::MomentsCheck, &model, &mc, &io)
        }
    }
}

fn write_output(io: &IoArgs, body: &str) -> anyhow::Result<()> {
    match &io.out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {path}"))?,
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
        }
    }
    Ok(())
}

fn parse_samples(path: &str, dim: Option<usize>) -> anyhow::Result<CMat> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| anyhow!("line {}: invalid number `{}`", lineno + 1, f.trim()))
            })
            .collect::<anyhow::Result<_>>()?;
        if !fields.len().is_multiple_of(2) {
            bail!(
                "line {}: expected interleaved real/imaginary columns, got {} fields",
                lineno + 1,
                fields.len()
            );
        }
        let row: Vec<Complex64> = fields
            .chunks(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                bail!("line {}: inconsistent column count", lineno + 1);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{path}: no samples found");
    }
    let n = rows.len();
    let d = rows[0].len();
    if let Some(expect) = dim {
        if expect != d {
            bail!("{path}: file has dimension {d}, --dim says {expect}");
        }
    }
    // columns are samples
    Ok(CMat::from_fn(d, n, |i, j| rows[j][i]))
}

fn matrix_json(m: &CMat) -> serde_json::Value {
    serde_json::Value::Array(
        (0..m.nrows())
            .map(|i| {
                serde_json::Value::Array(
                    (0..m.ncols())
                        .map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn matrix_csv_rows(name: &str, rho: f64, m: &CMat, out: &mut String) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push_str(&format!(
                "{name},{rho},{i},{j},{},{}\n",
                m[(i, j)].re,
                m[(i, j)].im
            ));
        }
    }
}

fn estimate(
    input: &str,
    rho: f64,
    dim: Option<usize>,
    max_iter: usize,
    io: &IoArgs,
) -> anyhow::Result<ExitCode> {
    let samples = parse_samples(input, dim)?;
    let est = solve_rte(&samples, rho, io.tol, max_iter).map_err(|e| anyhow!("{e}"))?;
    let body = match io.format {
        Format::Json => {
            let v = serde_json::json!({
                "dim": samples.nrows(),
                "n": samples.ncols(),
                "rho": rho,
                "iterations": est.iterations,
                "residual": est.residual,
                "converged": est.converged,
                "matrix": matrix_json(&est.matrix),
            });
            serde_json::to_string_pretty(&v)? + "\n"
        }
        Format::Csv => {
            let mut s = format!(
                "# rho: {rho}\n# iterations: {}\n# residual: {:e}\n# converged: {}\n",
                est.iterations, est.residual, est.converged
            );
            for i in 0..est.matrix.nrows() {
                let row: Vec<String> = (0..est.matrix.ncols())
                    .flat_map(|j| {
                        let z = est.matrix[(i, j)];
                        [format!("{}", z.re), format!("{}", z.im)]
                    })
                    .collect();
                s.push_str(&row.join(","));
                s.push('\n');
            }
            s
        }
    };
    write_output(io, &body)?;
    Ok(ExitCode::SUCCESS)
}

fn limit_cmd(model_args: &ModelArgs, io: &IoArgs) -> anyhow::Result<ExitCode> {
    let b = model_args.b.first().copied().unwrap_or(BCoeff(Complex64::new(0.5, 0.0)));
    let model =
        CovarianceModel::toeplitz(model_args.dim, b.0).map_err(|e| anyhow!("{e}"))?;
    let mut json_entries = Vec::new();
    let mut csv = String::from("field,rho,i,j,value_re,value_im\n");
    for &rho in &model_args.rho {
        let lim = sigma_zero(&model, rho, io.tol.max(1e-12)).map_err(|e| anyhow!("{e}"))?;
        let bias = asymptotic_bias(&model, rho).map_err(|e| anyhow!("{e}"))?;
        match io.format {
            Format::Json => {
                json_entries.push(serde_json::json!({
                    "rho": rho,
                    "bias": bias,
                    "lambda": lim.lambda.as_slice(),
                    "d": lim.d.as_slice(),
                    "s": lim.s.as_slice(),
                    "iterations": lim.iterations,
                    "residual": lim.residual,
                    "sigma0": matrix_json(&lim.sigma0),
                }));
            }
            Format::Csv => {
                csv.push_str(&format!("bias,{rho},,,{bias},0\n"));
                for i in 0..model.dim() {
                    csv.push_str(&format!("lambda,{rho},{i},,{},0\n", lim.lambda[i]));
                    csv.push_str(&format!("d,{rho},{i},,{},0\n", lim.d[i]));
                    csv.push_str(&format!("s,{rho},{i},,{},0\n", lim.s[i]));
                }
                matrix_csv_rows("sigma0", rho, &lim.sigma0, &mut csv);
            }
        }
    }
    let body = match io.format {
        Format::Json => serde_json::to_string_pretty(&json_entries)? + "\n",
        Format::Csv => csv,
    };
    write_output(io, &body)?;
    Ok(ExitCode::SUCCESS)
}

fn moments_cmd(model_args: &ModelArgs, io: &IoArgs) -> anyhow::Result<ExitCode> {
    let b = model_args.b.first().copied().unwrap_or(BCoeff(Complex64::new(0.5, 0.0)));
    let model =
        CovarianceModel::toeplitz(model_args.dim, b.0).map_err(|e| anyhow!("{e}"))?;
    let mut json_entries = Vec::new();
    let mut csv = String::from("matrix,rho,i,j,value_re,value_im\n");
    for &rho in &model_args.rho {
        let lim = sigma_zero(&model, rho, 1e-9).map_err(|e| anyhow!("{e}"))?;
        let moments = CltMoments::compute(&model, &lim).map_err(|e| anyhow!("{e}"))?;
        match io.format {
            Format::Json => {
                json_entries.push(serde_json::json!({
                    "rho": rho,
                    "m1": matrix_json(&moments.m1),
                    "m2": matrix_json(&moments.m2),
                    "f_tilde": matrix_json(&moments.f_tilde),
                    "m1_tilde": matrix_json(&moments.m1_tilde),
                    "m2_tilde": matrix_json(&moments.m2_tilde),
                }));
            }
            Format::Csv => {
                matrix_csv_rows("m1", rho, &moments.m1, &mut csv);
                matrix_csv_rows("m2", rho, &moments.m2, &mut csv);
                matrix_csv_rows("f_tilde", rho, &moments.f_tilde, &mut csv);
            }
        }
    }
    let body = match io.format {
        Format::Json => serde_json::to_string_pretty(&json_entries)? + "\n",
        Format::Csv => csv,
    };
    write_output(io, &body)?;
    Ok(ExitCode::SUCCESS)
}

fn experiment(
    kind: ExperimentKind,
    model_args: &ModelArgs,
    mc: &McArgs,
    io: &IoArgs,
) -> anyhow::Result<ExitCode> {
    let mut n: Vec<usize> = mc.n.clone();
    n.extend(mc.ratio.iter().map(|r| r * model_args.dim));
    if n.is_empty() {
        n.push(1000);
    }
    let config = ExperimentConfig {
        kind,
        dim: model_args.dim,
        b: model_args.b.iter().map(|b| b.0).collect(),
        rho: model_args.rho.clone(),
        n,
        replications: mc.reps,
        seed: mc.seed,
        tol: io.tol,
        kappa: mc.kappa,
        out: io.out.clone(),
        format: io.format.into(),
    };
    let report = experiments::run(&config).map_err(|e| anyhow!("{e}"))?;
    write_output(io, &report.render())?;
    if report.has_failures() {
        Ok(ExitCode::from(1))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
