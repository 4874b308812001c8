//! Closed-form CDFs of the SU received SINR `Ω` and of the interference
//! `φ_p = P_s·g_sp` received by the PU.
//!
//! The SU power rule is `P_s = min(P_max, I/g̃_sp)`. Here `I` is whatever
//! threshold the rule actually uses: `I_p` under perfect CSI, or the
//! tightened `Î_p` from [`crate::power`] otherwise. `P_max = ∞` selects the
//! relaxed-peak regime throughout.

use crate::channel::ChannelParams;
use crate::error::{require_positive, Error, Result};
use crate::specfun::{bessel_i0_scaled, exp_integral_e1_scaled, integrate, marcum_q1};

/// `r²` may dip below zero by this much through cancellation before it is
/// reported as a singularity.
const R_SQUARED_SLACK: f64 = 1e-12;

fn check_peak(p_max: f64) -> Result<f64> {
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

fn check_argument(func: &'static str, x: f64, strictly_positive: bool) -> Result<f64> {
    let ok = x.is_finite() && if strictly_positive { x > 0.0 } else { x >= 0.0 };
    if ok {
        Ok(x)
    } else {
        Err(Error::Domain {
            func,
            value: x,
            expected: if strictly_positive {
                "finite x > 0"
            } else {
                "finite x >= 0"
            },
        })
    }
}

/// Distribution of `Ω = P_s·g_ss / (P_p·g_ps + N0)` and of `Z = P_s·g_ss`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaDistribution {
    pub params: ChannelParams,
    pub p_max: f64,
    /// Threshold used inside the power rule (`Î_p`, or `I_p` when β = 1).
    pub i_p_effective: f64,
}

impl OmegaDistribution {
    pub fn new(params: ChannelParams, p_max: f64, i_p_effective: f64) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            p_max: check_peak(p_max)?,
            i_p_effective: require_positive("i_p_effective", i_p_effective)?,
        })
    }

    /// CDF of `Z = P_s·g_ss`:
    ///
    /// `1 - e^{-z/(μss·Pmax)}(1 - e^{-I/(μsp·Pmax)})
    ///    - e^{-(I/(μsp·Pmax) + z/(μss·Pmax))} / (1 + μsp·z/(μss·I))`.
    pub fn cdf_z(&self, z: f64) -> Result<f64> {
        let z = check_argument("cdf_z", z, false)?;
        let ChannelParams { mu_ss, mu_sp, .. } = self.params;
        let i = self.i_p_effective;
        let a = i / (mu_sp * self.p_max);
        let b = z / (mu_ss * self.p_max);
        let capped = -(-a).exp_m1(); // P{g̃ <= I/Pmax}
        let value = 1.0 - (-b).exp() * capped - (-(a + b)).exp() / (1.0 + mu_sp * z / (mu_ss * i));
        Ok(value.clamp(0.0, 1.0))
    }

    /// CDF of `Ω` in closed form, using `Γ(0, ·)`:
    ///
    /// ```text
    /// F(x) = 1 - (1 - e^{-I/(μsp Pmax)}) e^{-N0 x/(μss Pmax)} / (1 + Pp μps x/(μss Pmax))
    ///          - μss I/(μsp μps Pp x) · e^{N0/(Pp μps) + μss I/(μsp μps Pp x)}
    ///            · Γ(0, (1/(Pp μps) + x/(μss Pmax)) (N0 + μss I/(μsp x)))
    /// ```
    ///
    /// The `e^{A}·Γ(0, G)` product is evaluated as `e^{G}Γ(0, G) · e^{A-G}`
    /// with `A - G = -(N0 x/(μss Pmax) + I/(μsp Pmax)) <= 0`, which never
    /// overflows.
    pub fn cdf_omega(&self, x: f64) -> Result<f64> {
        let x = check_argument("cdf_omega", x, false)?;
        if x == 0.0 {
            return Ok(0.0);
        }
        let ChannelParams {
            mu_ss,
            mu_ps,
            mu_sp,
            n0,
            p_p,
        } = self.params;
        let i = self.i_p_effective;
        let p_max = self.p_max;

        let capped = -(-i / (mu_sp * p_max)).exp_m1();
        let peak_term =
            capped * (-n0 * x / (mu_ss * p_max)).exp() / (1.0 + p_p * mu_ps * x / (mu_ss * p_max));

        let coef = mu_ss * i / (mu_sp * mu_ps * p_p * x);
        let gamma_arg = (1.0 / (p_p * mu_ps) + x / (mu_ss * p_max)) * (n0 + mu_ss * i / (mu_sp * x));
        let shift = -(n0 * x / (mu_ss * p_max) + i / (mu_sp * p_max));
        let interference_term = coef * exp_integral_e1_scaled(gamma_arg)? * shift.exp();

        Ok((1.0 - peak_term - interference_term).clamp(0.0, 1.0))
    }

    /// `F_Ω(x) = ∫_0^∞ f_gps(z) F_Z(x(P_p z + N0)) dz` by adaptive quadrature.
    ///
    /// Independent of the closed form in [`Self::cdf_omega`]; used to cross-check it.
    pub fn cdf_omega_by_quadrature(&self, x: f64, tolerance: f64) -> Result<f64> {
        let x = check_argument("cdf_omega_by_quadrature", x, false)?;
        let ChannelParams { mu_ps, n0, p_p, .. } = self.params;
        let integrand = |z: f64| {
            let fz = self.cdf_z(x * (p_p * z + n0)).unwrap_or(f64::NAN);
            (-z / mu_ps).exp() / mu_ps * fz
        };
        integrate(integrand, 0.0, f64::INFINITY, tolerance)
    }
}

/// Auxiliary quantities of the interference CDF at a point `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceAux {
    pub w: f64,
    pub u: f64,
    pub t: f64,
    pub r: f64,
    /// `u - r`, computed without cancellation.
    pub u_minus_r: f64,
}

/// Distribution of `φ_p = P_s·g_sp` given the power-rule threshold `i_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceDistribution {
    pub mu_sp: f64,
    /// `f64::INFINITY` for the relaxed-peak regime.
    pub p_max: f64,
    /// Threshold inside the power rule.
    pub i_p: f64,
    pub beta: f64,
}

impl InterferenceDistribution {
    pub fn new(mu_sp: f64, p_max: f64, i_p: f64, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(Self {
            mu_sp: require_positive("mu_sp", mu_sp)?,
            p_max: check_peak(p_max)?,
            i_p: require_positive("i_p", i_p)?,
            beta,
        })
    }

    pub fn with_threshold(&self, i_p: f64) -> Result<Self> {
        Self::new(self.mu_sp, self.p_max, i_p, self.beta)
    }

    pub fn is_relaxed(&self) -> bool {
        self.p_max.is_infinite()
    }

    /// `w = μ(1-β²)`, `u = (2/μ)(1 + β²μ/w + Iμ/(xw))`, `t = u - 4I/(wx)`,
    /// `r = sqrt(u² - 16β²I/(xw²))`.
    pub fn aux(&self, x: f64) -> Result<InterferenceAux> {
        let beta = self.beta;
        if beta <= 0.0 || beta >= 1.0 {
            return Err(Error::DegenerateCsi { beta });
        }
        let mu = self.mu_sp;
        let i = self.i_p;
        let w = mu * (1.0 - beta * beta);
        let u = (2.0 / mu) * (1.0 + beta * beta * mu / w + i * mu / (x * w));
        let t = u - 4.0 * i / (w * x);
        let cross = 16.0 * beta * beta * i / (x * w * w);
        let r_squared = u * u - cross;
        if r_squared < -R_SQUARED_SLACK {
            return Err(Error::Singular { x, r_squared });
        }
        let r = r_squared.max(0.0).sqrt();
        if r == 0.0 {
            return Err(Error::Singular { x, r_squared });
        }
        Ok(InterferenceAux {
            w,
            u,
            t,
            r,
            u_minus_r: cross / (u + r),
        })
    }

    /// CDF of `φ_p` at `x > 0`.
    ///
    /// For `0 < β < 1` and finite `P_max` this is the five-term closed form
    /// in `w, u, t, r` with Marcum Q and `I0`. Relaxed peak power dispatches
    /// to [`Self::relaxed_cdf`]. `β = 1` and `β = 0` use their exact branches:
    /// `min(P_max g_sp, I)`, and `min(P_max, I/g̃)·g` with independent gains.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let x = check_argument("cdf_interference", x, true)?;
        if self.beta == 1.0 {
            return Ok(self.perfect_csi_cdf(x));
        }
        if self.beta == 0.0 {
            return Ok(self.independent_cdf(x));
        }
        if self.is_relaxed() {
            return self.relaxed_cdf(x);
        }

        let aux = self.aux(x)?;
        let InterferenceAux {
            w, u, t, r, u_minus_r,
        } = aux;
        let p_max = self.p_max;
        let beta = self.beta;
        let i = self.i_p;
        let ratio = t / r;
        let decay = (-x / (self.mu_sp * p_max)).exp();

        let q_outer = marcum_q1(
            (u_minus_r * x / (2.0 * p_max)).sqrt(),
            ((u + r) * x / (2.0 * p_max)).sqrt(),
        )?;
        let q_inner = marcum_q1(
            beta * (2.0 * x / (p_max * w)).sqrt(),
            (2.0 * i / (p_max * w)).sqrt(),
        )?;
        let bessel_arg = 2.0 * beta * (x * i).sqrt() / (p_max * w);
        let bessel_term =
            (bessel_arg - u * x / (2.0 * p_max)).exp() * bessel_i0_scaled(bessel_arg)?;

        let value = 1.0 - decay + ratio * q_outer + decay * q_inner
            - 0.5 * (1.0 + ratio) * bessel_term;
        Ok(value.clamp(0.0, 1.0))
    }

    /// Relaxed-peak CDF `½(1 + t/r)`, whatever `p_max` holds.
    pub fn relaxed_cdf(&self, x: f64) -> Result<f64> {
        let x = check_argument("relaxed_cdf_interference", x, true)?;
        if self.beta == 1.0 {
            return Ok(if x >= self.i_p { 1.0 } else { 0.0 });
        }
        if self.beta == 0.0 {
            return Ok(x / (x + self.i_p));
        }
        let aux = self.aux(x)?;
        Ok((0.5 * (1.0 + aux.t / aux.r)).clamp(0.0, 1.0))
    }

    /// `φ_p = min(P_max g, I)`: truncated exponential with an atom at `I`.
    fn perfect_csi_cdf(&self, x: f64) -> f64 {
        if x >= self.i_p {
            1.0
        } else {
            -(-x / (self.mu_sp * self.p_max)).exp_m1()
        }
    }

    /// `φ_p = min(P_max, I/g̃)·g` with independent exponentials `g`, `g̃`.
    ///
    /// With `c = I/(μ P_max)`:
    /// `P{φ <= x} = (1 - e^{-c})(1 - e^{-x/(μ P_max)}) + e^{-c} - e^{-c(1 + x/I)} / (1 + x/I)`.
    fn independent_cdf(&self, x: f64) -> f64 {
        let mu = self.mu_sp;
        let i = self.i_p;
        let c = i / (mu * self.p_max);
        let k = 1.0 + x / i;
        let capped = -(-c).exp_m1();
        let value = capped * -(-x / (mu * self.p_max)).exp_m1() + (-c).exp() - (-c * k).exp() / k;
        value.clamp(0.0, 1.0)
    }

    /// `P{φ_p <= x}` by 1-D quadrature of the conditional Marcum Q form:
    ///
    /// `1 - e^{-x/(μ Pmax)} + (1/μ) ∫_{x/Pmax}^∞ e^{-y/μ} Q(β sqrt(2y/w), sqrt(2Iy/(wx))) dy`.
    ///
    /// Independent of the five-term closed form; valid for `0 < β < 1`.
    pub fn cdf_by_quadrature(&self, x: f64, tolerance: f64) -> Result<f64> {
        let x = check_argument("cdf_interference_by_quadrature", x, true)?;
        let beta = self.beta;
        if beta <= 0.0 || beta >= 1.0 {
            return Err(Error::DegenerateCsi { beta });
        }
        let mu = self.mu_sp;
        let w = mu * (1.0 - beta * beta);
        let i = self.i_p;
        let lower = x / self.p_max;
        let integrand = |y: f64| {
            let q = marcum_q1(beta * (2.0 * y / w).sqrt(), (2.0 * i * y / (w * x)).sqrt())
                .unwrap_or(f64::NAN);
            (-y / mu).exp() / mu * q
        };
        let tail = integrate(integrand, lower, f64::INFINITY, tolerance)?;
        Ok(1.0 - (-lower / mu).exp() + tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_omega(p_max: f64, i_p: f64) -> OmegaDistribution {
        OmegaDistribution::new(ChannelParams::unit(0.5).unwrap(), p_max, i_p).unwrap()
    }

    #[test]
    fn cdf_z_edges() {
        let d = unit_omega(2.0, 1.0);
        assert_eq!(d.cdf_z(0.0).unwrap(), 0.0);
        assert!(d.cdf_z(-1.0).is_err());
        // Very large threshold: the peak constraint alone is active.
        let loose = unit_omega(2.0, 1e12);
        for &z in &[0.1, 1.0, 5.0] {
            let expect = 1.0 - f64::exp(-z / 2.0);
            assert!((loose.cdf_z(z).unwrap() - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn cdf_omega_edges() {
        let d = unit_omega(2.0, 1.0);
        assert_eq!(d.cdf_omega(0.0).unwrap(), 0.0);
        assert!(d.cdf_omega(-0.1).is_err());
        assert!(d.cdf_omega(1e4).unwrap() >= 0.9995);
        let tiny = d.cdf_omega(1e-9).unwrap();
        assert!((0.0..1e-6).contains(&tiny), "{tiny}");
    }

    #[test]
    fn cdf_omega_relaxed_peak() {
        let d = unit_omega(f64::INFINITY, 1.0);
        let a = d.cdf_omega(0.6).unwrap();
        let b = d.cdf_omega_by_quadrature(0.6, 1e-12).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn perfect_csi_interference_is_capped() {
        let d = InterferenceDistribution::new(1.0, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(d.cdf(1.0).unwrap(), 1.0);
        assert_eq!(d.cdf(3.0).unwrap(), 1.0);
        let below = d.cdf(0.5).unwrap();
        assert!((below - (1.0 - f64::exp(-0.25))).abs() < 1e-15);
    }

    #[test]
    fn independent_branch_relaxed_limit() {
        let d = InterferenceDistribution::new(1.0, f64::INFINITY, 2.0, 0.0).unwrap();
        assert!((d.cdf(1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn aux_rejects_degenerate_beta() {
        let d = InterferenceDistribution::new(1.0, 2.0, 1.0, 1.0).unwrap();
        assert!(matches!(d.aux(1.0), Err(Error::DegenerateCsi { .. })));
    }

    #[test]
    fn aux_identities() {
        let d = InterferenceDistribution::new(1.3, 2.0, 0.7, 0.6).unwrap();
        let a = d.aux(0.9).unwrap();
        assert!(a.r > 0.0 && a.r <= a.u);
        assert!((a.u_minus_r - (a.u - a.r)).abs() < 1e-12);
    }

    #[test]
    fn interference_rejects_nonpositive_x() {
        let d = InterferenceDistribution::new(1.0, 2.0, 1.0, 0.8).unwrap();
        assert!(d.cdf(0.0).is_err());
        assert!(d.relaxed_cdf(-1.0).is_err());
    }
}
