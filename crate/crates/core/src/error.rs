//! Crate-wide error type.

use thiserror::Error;

use crate::rte::ScatterEstimate;

/// Errors surfaced by solvers, quadrature and experiment drivers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature exhausted its subdivision budget before reaching
    /// the requested tolerance. Carries the best estimate and its bound.
    #[error("quadrature stalled at error bound {error_bound:.3e} (best estimate {estimate:.12e})")]
    QuadratureAccuracy { estimate: f64, error_bound: f64 },

    /// Diagonal weights too ill-conditioned for reliable quadrature.
    #[error("diagonal weights too ill-conditioned (max/min ratio {ratio:.3e} > 1e8)")]
    WeightsConditioning { ratio: f64 },

    /// The Picard iteration for the scatter fixed point hit its iteration cap.
    /// Carries the last iterate so callers can inspect it.
    #[error(
        "scatter fixed point did not converge after {} iterations (residual {:.3e})",
        last.iterations,
        last.residual
    )]
    RteNoConvergence { last: Box<ScatterEstimate> },

    /// The per-eigenvalue fixed point hit its iteration cap.
    #[error("eigenvalue fixed point did not converge after {iterations} iterations (residual {residual:.3e})")]
    LimitNoConvergence {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    /// The per-eigenvalue iteration left its feasibility region.
    #[error("eigenvalue fixed point diverged: d[{index}] = {value:.3e} exceeds bound {bound:.3e}")]
    LimitDiverged { index: usize, value: f64, bound: f64 },

    /// A sample vector is zero (or yields a zero quadratic form).
    #[error("sample {index} is degenerate")]
    DegenerateSample { index: usize },

    /// A matrix expected to be positive semi-definite is not.
    #[error("matrix is not positive semi-definite (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },

    /// The CLT resolvent (I - F~)^{-1} cannot be formed reliably.
    #[error("ill-conditioned resolvent: {0}")]
    IllConditionedResolvent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
