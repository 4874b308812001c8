//! Rayleigh block-fading gains and the imperfect SU→PU channel estimate.
//!
//! The estimate available at the SU transmitter is
//! `h̃_sp = β·h_sp + sqrt(1 - β²)·ε`, with `ε ~ CN(0, μ_sp)` independent of
//! `h_sp`. Both amplitudes are sampled as circular complex Gaussians and
//! then squared, so `g̃_sp` keeps the exponential marginal of `g_sp`.
//!
//! # Random streams
//!
//! [`stream_rng`] maps `(seed, stream)` to a ChaCha8 generator seeded with
//! `seed_from_u64(seed)` and switched to ChaCha stream `stream`. The Monte
//! Carlo engine uses one stream per fixed-size packet chunk, so results do
//! not depend on thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{require_positive, Error, Result};
use crate::specfun::bessel_i0_scaled;

/// Average link gains and noise/interference powers, all linear scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Mean of `g_ss` (SU → SU).
    pub mu_ss: f64,
    /// Mean of `g_ps` (PU → SU).
    pub mu_ps: f64,
    /// Mean of `g_sp` (SU → PU).
    pub mu_sp: f64,
    /// AWGN power at the SU receiver.
    pub n0: f64,
    /// PU transmit power.
    pub p_p: f64,
}

impl ChannelParams {
    pub fn new(mu_ss: f64, mu_ps: f64, mu_sp: f64, n0: f64, p_p: f64) -> Result<Self> {
        Ok(Self {
            mu_ss: require_positive("mu_ss", mu_ss)?,
            mu_ps: require_positive("mu_ps", mu_ps)?,
            mu_sp: require_positive("mu_sp", mu_sp)?,
            n0: require_positive("n0", n0)?,
            p_p: require_positive("p_p", p_p)?,
        })
    }

    /// Unit-mean fading, unit noise, with the given PU power.
    pub fn unit(p_p: f64) -> Result<Self> {
        Self::new(1.0, 1.0, 1.0, 1.0, p_p)
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.mu_ss, self.mu_ps, self.mu_sp, self.n0, self.p_p).map(|_| ())
    }
}

/// Quality of the SU transmitter's estimate of the SU → PU channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsiModel {
    beta: f64,
}

impl CsiModel {
    pub fn new(beta: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&beta) {
            Ok(Self { beta })
        } else {
            Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                reason: "must lie in [0, 1]",
            })
        }
    }

    pub fn perfect() -> Self {
        Self { beta: 1.0 }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_perfect(&self) -> bool {
        self.beta == 1.0
    }
}

/// One block's channel power gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSample {
    pub g_ss: f64,
    pub g_ps: f64,
    pub g_sp: f64,
    /// The SU transmitter's estimate of `g_sp`.
    pub g_tilde_sp: f64,
}

/// Deterministic generator for `(seed, stream)`; see the module docs.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> (f64, f64) {
    let scale = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    (scale * re, scale * im)
}

/// Draws one block of gains. Always consumes the same number of variates,
/// whatever `beta` is.
pub fn sample_gains<R: Rng + ?Sized>(
    params: &ChannelParams,
    csi: &CsiModel,
    rng: &mut R,
) -> GainSample {
    let g_ss = params.mu_ss * rng.sample::<f64, _>(Exp1);
    let g_ps = params.mu_ps * rng.sample::<f64, _>(Exp1);
    let h = complex_gaussian(rng, params.mu_sp);
    let eps = complex_gaussian(rng, params.mu_sp);
    let beta = csi.beta;
    let spread = (1.0 - beta * beta).sqrt();
    let h_tilde = (beta * h.0 + spread * eps.0, beta * h.1 + spread * eps.1);
    GainSample {
        g_ss,
        g_ps,
        g_sp: h.0 * h.0 + h.1 * h.1,
        g_tilde_sp: h_tilde.0 * h_tilde.0 + h_tilde.1 * h_tilde.1,
    }
}

/// Joint density of `(g_sp, g̃_sp)` at `(y, z)`:
///
/// `exp(-(y+z)/((1-β²)μ)) / ((1-β²)μ²) · I0(2β·sqrt(yz) / ((1-β²)μ))`.
///
/// Only defined for `0 < β < 1`; at the endpoints the pair is either
/// identical or independent and has no density of this form.
pub fn joint_pdf_gsp(y: f64, z: f64, params: &ChannelParams, csi: &CsiModel) -> Result<f64> {
    let beta = csi.beta;
    if beta <= 0.0 || beta >= 1.0 {
        return Err(Error::DegenerateCsi { beta });
    }
    if !(y >= 0.0 && z >= 0.0) || !y.is_finite() || !z.is_finite() {
        return Err(Error::Domain {
            func: "joint_pdf_gsp",
            value: if y >= 0.0 { z } else { y },
            expected: "finite y >= 0 and z >= 0",
        });
    }
    let mu = params.mu_sp;
    let spread = (1.0 - beta * beta) * mu;
    let arg = 2.0 * beta * (y * z).sqrt() / spread;
    let scaled = bessel_i0_scaled(arg)?;
    Ok((arg - (y + z) / spread).exp() * scaled / ((1.0 - beta * beta) * mu * mu))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_must_be_positive() {
        assert!(ChannelParams::new(1.0, 1.0, 1.0, 1.0, 0.5).is_ok());
        assert!(ChannelParams::new(0.0, 1.0, 1.0, 1.0, 0.5).is_err());
        assert!(ChannelParams::new(1.0, 1.0, 1.0, f64::NAN, 0.5).is_err());
        assert!(CsiModel::new(1.2).is_err());
        assert!(CsiModel::new(-0.1).is_err());
    }

    #[test]
    fn perfect_csi_estimate_is_exact() {
        let params = ChannelParams::unit(0.5).unwrap();
        let csi = CsiModel::perfect();
        let mut rng = stream_rng(7, 0);
        for _ in 0..10_000 {
            let g = sample_gains(&params, &csi, &mut rng);
            assert_eq!(g.g_sp, g.g_tilde_sp);
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let params = ChannelParams::new(1.0, 2.0, 0.5, 1.0, 0.5).unwrap();
        let csi = CsiModel::new(0.8).unwrap();
        let draw = |seed, stream| {
            let mut rng = stream_rng(seed, stream);
            (0..100)
                .map(|_| sample_gains(&params, &csi, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(3, 1), draw(3, 1));
        assert_ne!(draw(3, 1), draw(3, 2));
        assert_ne!(draw(3, 1), draw(4, 1));
    }

    #[test]
    fn joint_pdf_rejects_degenerate_beta() {
        let params = ChannelParams::unit(0.5).unwrap();
        assert!(matches!(
            joint_pdf_gsp(1.0, 1.0, &params, &CsiModel::perfect()),
            Err(Error::DegenerateCsi { .. })
        ));
        assert!(joint_pdf_gsp(1.0, 1.0, &params, &CsiModel::new(0.0).unwrap()).is_err());
    }

    #[test]
    fn joint_pdf_small_beta_is_product_of_exponentials() {
        let params = ChannelParams::new(1.0, 1.0, 1.5, 1.0, 0.5).unwrap();
        let csi = CsiModel::new(1e-6).unwrap();
        for &(y, z) in &[(0.1, 0.3), (1.0, 2.0), (3.0, 0.5)] {
            let f = joint_pdf_gsp(y, z, &params, &csi).unwrap();
            let expect = (-(y + z) / 1.5f64).exp() / (1.5 * 1.5);
            assert!((f - expect).abs() < 1e-9, "{f} vs {expect}");
        }
    }
}
