//! Special functions used by the closed-form CDFs.
//!
//! All functions are pure, reject NaN/infinite input, and report domain
//! violations as [`Error::Domain`].

mod quadrature;

pub use quadrature::{integrate, QuadratureOracle};

use crate::error::{require_finite, Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const EPS: f64 = 1e-17;

/// Below this the power series is used for `E1`, the continued fraction above.
const E1_SWITCH: f64 = 1.0;

/// Below this the power series is used for `I0`, the asymptotic expansion above.
pub const I0_SWITCH: f64 = 30.0;

fn domain(func: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        func,
        value,
        expected,
    }
}

/// `Γ(0, x) = E1(x) = ∫_x^∞ e^{-u}/u du` for `x > 0`.
pub fn exp_integral_gamma0(x: f64) -> Result<f64> {
    let x = require_finite("exp_integral_gamma0", x)?;
    if x <= 0.0 {
        return Err(domain("exp_integral_gamma0", x, "x > 0"));
    }
    if x < E1_SWITCH {
        Ok(e1_series(x))
    } else {
        Ok(e1_continued_fraction_scaled(x) * (-x).exp())
    }
}

/// `e^x · E1(x)` for `x > 0`; stays finite where `E1` underflows.
pub fn exp_integral_e1_scaled(x: f64) -> Result<f64> {
    let x = require_finite("exp_integral_e1_scaled", x)?;
    if x <= 0.0 {
        return Err(domain("exp_integral_e1_scaled", x, "x > 0"));
    }
    if x < E1_SWITCH {
        Ok(e1_series(x) * x.exp())
    } else {
        Ok(e1_continued_fraction_scaled(x))
    }
}

// E1(x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)
fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = 1.0; // (-x)^k / k!
    for k in 1..200 {
        power *= -x / k as f64;
        let term = power / k as f64;
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

// Modified Lentz evaluation of e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...))).
fn e1_continued_fraction_scaled(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Modified Bessel function of the first kind, order zero.
///
/// Fails for arguments whose result overflows `f64` (x ≳ 713); use
/// [`bessel_i0_scaled`] there.
pub fn bessel_i0(x: f64) -> Result<f64> {
    let x = require_finite("bessel_i0", x)?;
    if x < 0.0 {
        return Err(domain("bessel_i0", x, "x >= 0"));
    }
    if x < I0_SWITCH {
        return Ok(i0_series(x));
    }
    let value = i0_asymptotic_scaled(x) * x.exp();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain("bessel_i0", x, "result representable in f64"))
    }
}

/// `e^{-x} · I0(x)`, finite for every `x >= 0`.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    let x = require_finite("bessel_i0_scaled", x)?;
    if x < 0.0 {
        return Err(domain("bessel_i0_scaled", x, "x >= 0"));
    }
    Ok(if x < I0_SWITCH {
        i0_series(x) * (-x).exp()
    } else {
        i0_asymptotic_scaled(x)
    })
}

// Σ ((x/2)^2)^k / (k!)^2
pub(crate) fn i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        let k = k as f64;
        term *= q / (k * k);
        sum += term;
        if term < EPS * sum {
            break;
        }
    }
    sum
}

// e^{-x} I0(x) ~ (2πx)^{-1/2} Σ c_k x^{-k}, c_k = ((2k-1)!!)^2 / (k! 8^k)
pub(crate) fn i0_asymptotic_scaled(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = term * odd * odd / (8.0 * k as f64 * x);
        // The series is asymptotic: stop at the smallest term.
        if next >= term {
            break;
        }
        term = next;
        sum += term;
        if term < EPS * sum {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// First-order Marcum Q function `Q1(a, b) = ∫_b^∞ y e^{-(y²+a²)/2} I0(a y) dy`.
///
/// Evaluated as the Poisson mixture
/// `Σ_k Pois(k; a²/2) · Q(k+1, b²/2)`, where `Q(k+1, y) = P{Pois(y) <= k}`
/// is the regularized upper incomplete gamma function at integer order.
/// Terms are accumulated in log space, and the sum stops once the remaining
/// Poisson tail is below `1e-16`.
///
/// For `b < a` the series sums to nearly 1 and loses relative accuracy, so
/// the reflection `Q1(a,b) + Q1(b,a) = 1 + e^{-(a²+b²)/2} I0(ab)` is used
/// instead, with `Q1(b,a)` small and computed by the series.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    let a = require_finite("marcum_q1", a)?;
    let b = require_finite("marcum_q1", b)?;
    if a < 0.0 {
        return Err(domain("marcum_q1", a, "a >= 0"));
    }
    if b < 0.0 {
        return Err(domain("marcum_q1", b, "b >= 0"));
    }
    if b == 0.0 {
        return Ok(1.0);
    }
    if a == 0.0 {
        return Ok((-0.5 * b * b).exp());
    }
    if b < a {
        let diff = a - b;
        let reflected = 1.0 + (-0.5 * diff * diff).exp() * bessel_i0_scaled(a * b)?
            - marcum_series(b, a);
        return Ok(reflected.clamp(0.0, 1.0));
    }
    Ok(marcum_series(a, b).clamp(0.0, 1.0))
}

fn marcum_series(a: f64, b: f64) -> f64 {
    let lambda = 0.5 * a * a;
    let y = 0.5 * b * b;
    let ln_lambda = lambda.ln();
    let ln_y = y.ln();
    let mut ln_fact = 0.0; // ln k!
    let mut cdf_y = 0.0; // P{Pois(y) <= k}
    let mut sum = 0.0;
    let mut k: u64 = 0;
    loop {
        let kf = k as f64;
        if k > 0 {
            ln_fact += kf.ln();
        }
        cdf_y += (-y + kf * ln_y - ln_fact).exp();
        let cdf_y_k = cdf_y.min(1.0);
        let ln_pois = -lambda + kf * ln_lambda - ln_fact;
        let weight = ln_pois.exp();
        sum += weight * cdf_y_k;

        // Tail bound Σ_{j>k} Pois(j; λ) <= Pois(k+1; λ) / (1 - λ/(k+2)), valid for k+2 > λ.
        if kf + 2.0 > lambda {
            let next = (ln_pois + ln_lambda - (kf + 1.0).ln()).exp();
            let tail = next / (1.0 - lambda / (kf + 2.0));
            if tail < 1e-16 {
                break;
            }
        }
        k += 1;
        if k > 1_000_000 {
            break;
        }
    }
    sum
}
