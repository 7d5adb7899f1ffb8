//! Adaptive Gauss-Kronrod quadrature on a finite interval.
//!
//! A 7-point Gauss / 15-point Kronrod pair drives a global-error bisection
//! strategy: the segment with the worst error estimate is split until the
//! summed error bound drops below the requested absolute tolerance. All
//! Kronrod nodes are interior, so integrable endpoint singularities (e.g.
//! `t^{a-1}` with `a < 1`) are handled without special casing.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Gauss-Kronrod 15 abscissae on [0, 1] (positive half, last entry is 0).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// 7-point Gauss weights, matching the odd-indexed Kronrod abscissae.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// 15-point Kronrod weights.
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Options for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Absolute tolerance on the integral value.
    pub abs_tol: f64,
    /// Cap on the number of interval subdivisions.
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_subdivisions: 10_000,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_bound: f64,
    pub subdivisions: usize,
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut gauss = WG[3] * f_center;
    let mut kronrod = WGK[7] * f_center;
    for j in 0..7 {
        let x = half * XGK[j];
        let fsum = f(center - x) + f(center + x);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half.abs())
}

/// Integrate `f` over `[a, b]` to the requested absolute tolerance.
///
/// Fails with [`Error::QuadratureAccuracy`] (carrying the best estimate and
/// its bound) if the subdivision budget is exhausted first, and with
/// [`Error::Domain`] if the integrand produces non-finite values.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    let (v0, e0) = gk15(&f, a, b);
    if !v0.is_finite() {
        return Err(Error::Domain(
            "integrand produced a non-finite value".into(),
        ));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v0,
        error: e0,
    });
    let mut total_value = v0;
    let mut total_error = e0;
    let mut subdivisions = 0usize;

    while total_error > opts.abs_tol {
        if subdivisions >= opts.max_subdivisions {
            return Err(Error::QuadratureAccuracy {
                estimate: total_value,
                error_bound: total_error,
            });
        }
        let worst = heap.pop().expect("heap cannot be empty while error > 0");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval no longer splittable in f64
            return Err(Error::QuadratureAccuracy {
                estimate: total_value,
                error_bound: total_error,
            });
        }
        let (lv, le) = gk15(&f, worst.a, mid);
        let (rv, re) = gk15(&f, mid, worst.b);
        if !(lv.is_finite() && rv.is_finite()) {
            return Err(Error::Domain(
                "integrand produced a non-finite value".into(),
            ));
        }
        total_value += lv + rv - worst.value;
        total_error += le + re - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
        subdivisions += 1;
    }

    Ok(QuadResult {
        value: total_value,
        error_bound: total_error,
        subdivisions,
    })
}
