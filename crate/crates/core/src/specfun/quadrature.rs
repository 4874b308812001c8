//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Used as the brute-force reference for the special functions and CDF
//! closed forms. Semi-infinite ranges are mapped onto `[0, 1)` with
//! `x = a + t / (1 - t)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4000;

/// A definite integral of a real function with a requested tolerance.
///
/// The tolerance is applied as `max(tolerance, tolerance * |result|)`, i.e.
/// absolute for small results and relative for large ones.
#[derive(Clone)]
pub struct QuadratureOracle<F> {
    pub integrand: F,
    pub lower: f64,
    /// May be `f64::INFINITY`.
    pub upper: f64,
    pub tolerance: f64,
}

impl<F: Fn(f64) -> f64> QuadratureOracle<F> {
    pub fn new(integrand: F, lower: f64, upper: f64, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                value: tolerance,
                reason: "must be finite and > 0",
            });
        }
        if !lower.is_finite() || upper.is_nan() || upper < lower {
            return Err(Error::InvalidParameter {
                name: "upper",
                value: upper,
                reason: "need finite lower <= upper",
            });
        }
        Ok(Self {
            integrand,
            lower,
            upper,
            tolerance,
        })
    }

    pub fn integrate(&self) -> Result<f64> {
        if self.upper == self.lower {
            return Ok(0.0);
        }
        if self.upper.is_infinite() {
            let a = self.lower;
            let f = &self.integrand;
            let mapped = |t: f64| {
                let s = 1.0 - t;
                f(a + t / s) / (s * s)
            };
            adaptive(&mapped, 0.0, 1.0, self.tolerance)
        } else {
            adaptive(&self.integrand, self.lower, self.upper, self.tolerance)
        }
    }
}

/// Shorthand for `QuadratureOracle::new(..)?.integrate()`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lower: f64, upper: f64, tolerance: f64) -> Result<f64> {
    QuadratureOracle::new(f, lower, upper, tolerance)?.integrate()
}

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
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tolerance: f64) -> Result<f64> {
    let mut heap = BinaryHeap::new();
    // Start from a handful of panels so narrow features are not missed.
    let panels = 8;
    let width = (b - a) / panels as f64;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { lo + width };
        heap.push(kronrod(f, lo, hi));
    }

    loop {
        let total: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature {
                tolerance,
                estimate: f64::INFINITY,
            });
        }
        let target = tolerance.max(tolerance * total.abs());
        if error <= target {
            return Ok(total);
        }
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Quadrature {
                tolerance: target,
                estimate: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            heap.push(Segment { error: 0.0, ..worst });
            continue;
        }
        heap.push(kronrod(f, worst.a, mid));
        heap.push(kronrod(f, mid, worst.b));
    }
}
