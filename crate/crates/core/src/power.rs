//! SU transmit-power rule and the interference-confidence threshold solver.
//!
//! With imperfect CSI the rule `P_s = min(P_max, I_p/g̃_sp)` can overshoot
//! the interference cap at the PU. The solver finds a tightened threshold
//! `Î_p <= I_p` such that `P{φ_p <= I_p} = π` when the rule uses `Î_p`.

use crate::analytics::InterferenceDistribution;
use crate::error::{require_positive, Error, Result};

/// Convergence target for `|F(I_p | Î_p) - π|`.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

/// Lower end of the bisection bracket, relative to `I_p`.
const BRACKET_FLOOR: f64 = 1e-12;

/// Peak-power and interference constraints on the SU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPolicy {
    /// `f64::INFINITY` for relaxed peak power.
    pub p_max: f64,
    /// Interference cap at the PU receiver.
    pub i_p: f64,
    /// Required `P{φ_p <= I_p}`; only meaningful with imperfect CSI.
    pub pi: f64,
    /// Threshold actually used in the power rule.
    pub i_p_effective: f64,
}

impl PowerPolicy {
    /// Policy that applies `I_p` directly, as under perfect CSI.
    pub fn direct(p_max: f64, i_p: f64) -> Result<Self> {
        let i_p = require_positive("i_p", i_p)?;
        check_p_max(p_max)?;
        Ok(Self {
            p_max,
            i_p,
            pi: 1.0,
            i_p_effective: i_p,
        })
    }

    /// Policy with `Î_p` solved for confidence `pi`. Fails with
    /// [`Error::InfeasibleConfidence`] when no positive threshold exists.
    pub fn with_confidence(p_max: f64, i_p: f64, pi: f64, beta: f64, mu_sp: f64) -> Result<Self> {
        match solve_effective_threshold(i_p, pi, p_max, beta, mu_sp)? {
            ThresholdSolution::Infeasible => Err(Error::InfeasibleConfidence { pi, beta }),
            sol => Ok(Self {
                p_max,
                i_p,
                pi,
                i_p_effective: sol.threshold().expect("feasible solution"),
            }),
        }
    }

    /// `min(p_max, i_p_effective / g̃)`; `p_max` when `g̃ = 0`.
    pub fn transmit_power(&self, g_tilde_sp: f64) -> f64 {
        transmit_power(g_tilde_sp, self)
    }

    /// Interference `φ_p = P_s·g_sp` at the PU.
    ///
    /// On the interference arm this is `Î·(g_sp/g̃_sp)`, which is exactly `Î`
    /// when the estimate is exact.
    pub fn interference(&self, g_sp: f64, g_tilde_sp: f64) -> f64 {
        if g_tilde_sp > 0.0 && self.i_p_effective / g_tilde_sp < self.p_max {
            self.i_p_effective * (g_sp / g_tilde_sp)
        } else {
            self.p_max * g_sp
        }
    }

    /// Whether `φ_p` exceeds the cap `I_p`.
    pub fn violates(&self, g_sp: f64, g_tilde_sp: f64) -> bool {
        self.interference(g_sp, g_tilde_sp) > self.i_p
    }
}

fn check_p_max(p_max: f64) -> Result<f64> {
    if p_max > 0.0 && !p_max.is_nan() {
        Ok(p_max)
    } else {
        Err(Error::InvalidParameter {
            name: "p_max",
            value: p_max,
            reason: "must be > 0 (infinity means relaxed peak power)",
        })
    }
}

pub fn transmit_power(g_tilde_sp: f64, policy: &PowerPolicy) -> f64 {
    if g_tilde_sp <= 0.0 {
        return policy.p_max;
    }
    policy.p_max.min(policy.i_p_effective / g_tilde_sp)
}

/// Outcome of [`solve_effective_threshold`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSolution {
    /// `F(I_p | I_p) >= π` already; no tightening.
    Unchanged(f64),
    /// Tightened `Î_p < I_p` with `F(I_p | Î_p) = π`.
    Tightened(f64),
    /// No positive threshold satisfies the constraint (e.g. `π = 1` with
    /// `β < 1`). The SU must stay silent, so throughput is zero.
    Infeasible,
}

impl ThresholdSolution {
    pub fn threshold(&self) -> Option<f64> {
        match *self {
            Self::Unchanged(v) | Self::Tightened(v) => Some(v),
            Self::Infeasible => None,
        }
    }
}

/// Solves `F_φp(I_p | Î) = π` for `Î ∈ (0, I_p]` by bisection on `ln Î`.
///
/// `F_φp(I_p | Î)` is nonincreasing in `Î`: more allowed power means more
/// interference. With `p_max = ∞` the relaxed-peak CDF is used.
pub fn solve_effective_threshold(
    i_p: f64,
    pi: f64,
    p_max: f64,
    beta: f64,
    mu_sp: f64,
) -> Result<ThresholdSolution> {
    if !(0.0..=1.0).contains(&pi) {
        return Err(Error::InvalidParameter {
            name: "pi",
            value: pi,
            reason: "must lie in [0, 1]",
        });
    }
    let i_p = require_positive("i_p", i_p)?;
    let dist = InterferenceDistribution::new(mu_sp, p_max, i_p, beta)?;
    let cdf_at = |threshold: f64| -> Result<f64> { dist.with_threshold(threshold)?.cdf(i_p) };

    if cdf_at(i_p)? >= pi {
        return Ok(ThresholdSolution::Unchanged(i_p));
    }
    if pi >= 1.0 {
        return Ok(ThresholdSolution::Infeasible);
    }

    let mut lo = BRACKET_FLOOR * i_p;
    let mut hi = i_p;
    if cdf_at(lo)? < pi {
        return Ok(ThresholdSolution::Infeasible);
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        let value = cdf_at(mid)?;
        if (value - pi).abs() <= SOLVER_TOLERANCE {
            return Ok(ThresholdSolution::Tightened(mid));
        }
        if value >= pi {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 4.0 * f64::EPSILON {
            break;
        }
    }
    Ok(ThresholdSolution::Tightened(lo))
}
