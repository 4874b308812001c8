//! RTD and INR HARQ: per-round decode probabilities, outage and throughput.
//!
//! A packet carries `D` nats and is sent in at most `M + 1` rounds of
//! lengths `l_1..l_{M+1}`. After round `m` the equivalent rate is
//! `R_m = D / Σ_{n<=m} l_n`. The SINR `Ω` stays fixed over a packet, so each
//! decode event is an interval of `Ω` and its probability is a difference of
//! the `Ω` CDF at two thresholds:
//!
//! - RTD (same codeword repeated, MRC): decoded by round `m` iff
//!   `ln(1 + mΩ) >= R`, threshold `(e^R - 1)/m`.
//! - INR (new parity each round): decoded by round `m` iff
//!   `ln(1 + Ω) >= R_m`, threshold `e^{R_m} - 1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytics::OmegaDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Repetition time diversity.
    Rtd,
    /// Incremental redundancy.
    Inr,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rtd => "rtd",
            Self::Inr => "inr",
        })
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rtd" => Ok(Self::Rtd),
            "inr" => Ok(Self::Inr),
            other => Err(format!("unknown protocol `{other}` (expected rtd or inr)")),
        }
    }
}

/// Information per packet and the length of every (re)transmission round.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSchedule {
    d_nats: f64,
    lengths: Vec<f64>,
}

impl RateSchedule {
    pub fn new(d_nats: f64, lengths: Vec<f64>) -> Result<Self> {
        if !(d_nats.is_finite() && d_nats > 0.0) {
            return Err(Error::RateSchedule(format!(
                "information per packet must be > 0, got {d_nats}"
            )));
        }
        if lengths.is_empty() {
            return Err(Error::RateSchedule("at least one round is required".into()));
        }
        if let Some(bad) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::RateSchedule(format!(
                "round lengths must be > 0, got {bad}"
            )));
        }
        Ok(Self { d_nats, lengths })
    }

    /// `rounds` rounds of one channel use each, initial rate `rate`, so `R_m = rate/m`.
    pub fn equal_length(rate: f64, rounds: usize) -> Result<Self> {
        Self::new(rate, vec![1.0; rounds])
    }

    pub fn d_nats(&self) -> f64 {
        self.d_nats
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn rounds(&self) -> usize {
        self.lengths.len()
    }

    /// Initial rate `R = R_1`.
    pub fn initial_rate(&self) -> f64 {
        self.d_nats / self.lengths[0]
    }

    /// `Σ_{n<=m} l_n` for `m = 1..=M+1`.
    pub fn cumulative_lengths(&self) -> Vec<f64> {
        self.lengths
            .iter()
            .scan(0.0, |acc, l| {
                *acc += l;
                Some(*acc)
            })
            .collect()
    }

    /// `R_m = D / Σ_{n<=m} l_n`; strictly decreasing.
    pub fn rates(&self) -> Vec<f64> {
        self.cumulative_lengths()
            .into_iter()
            .map(|total| self.d_nats / total)
            .collect()
    }

    pub fn is_equal_length(&self) -> bool {
        self.lengths.iter().all(|&l| l == self.lengths[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarqConfig {
    pub protocol: Protocol,
    /// Maximum number of retransmissions `M`; a packet uses up to `M + 1` rounds.
    pub m_max: usize,
    pub schedule: RateSchedule,
    /// Block length in channel uses. The formulas assume every packet fits
    /// well inside one block; this value is carried but never used.
    pub coherence_length: Option<f64>,
}

impl HarqConfig {
    pub fn new(protocol: Protocol, m_max: usize, schedule: RateSchedule) -> Result<Self> {
        let config = Self {
            protocol,
            m_max,
            schedule,
            coherence_length: None,
        };
        config.validate()?;
        Ok(config)
    }

    /// Equal-length rounds with initial rate `rate` (`R_m = rate/m`).
    pub fn equal_length(protocol: Protocol, m_max: usize, rate: f64) -> Result<Self> {
        Self::new(protocol, m_max, RateSchedule::equal_length(rate, m_max + 1)?)
    }

    pub fn validate(&self) -> Result<()> {
        let rounds = self.schedule.rounds();
        if rounds != self.m_max + 1 {
            return Err(Error::RateSchedule(format!(
                "M = {} needs {} round lengths, got {rounds}",
                self.m_max,
                self.m_max + 1
            )));
        }
        if self.protocol == Protocol::Rtd && !self.schedule.is_equal_length() {
            return Err(Error::RateSchedule(
                "RTD repeats one codeword, so all round lengths must be equal".into(),
            ));
        }
        let rates = self.schedule.rates();
        if rates.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Less)) {
            return Err(Error::RateSchedule(
                "equivalent rates must be strictly decreasing".into(),
            ));
        }
        Ok(())
    }

    pub fn rates(&self) -> Vec<f64> {
        self.schedule.rates()
    }

    /// SINR thresholds `x_1 > x_2 > .. > x_{M+1}`: the packet is decoded by
    /// round `m` iff `Ω >= x_m`.
    pub fn decode_thresholds(&self) -> Vec<f64> {
        match self.protocol {
            Protocol::Rtd => {
                let base = self.schedule.initial_rate().exp_m1();
                (1..=self.m_max + 1).map(|m| base / m as f64).collect()
            }
            Protocol::Inr => self.rates().into_iter().map(f64::exp_m1).collect(),
        }
    }
}

/// A CDF of the SU SINR `Ω`, analytic or empirical.
pub trait OmegaCdf {
    fn omega_cdf(&self, x: f64) -> Result<f64>;
}

impl OmegaCdf for OmegaDistribution {
    fn omega_cdf(&self, x: f64) -> Result<f64> {
        self.cdf_omega(x)
    }
}

impl<F: Fn(f64) -> f64> OmegaCdf for F {
    fn omega_cdf(&self, x: f64) -> Result<f64> {
        Ok(self(x))
    }
}

/// `Pr{A_m}` for `m = 1..=M+1` and the outage probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeDistribution {
    pub p_decode: Vec<f64>,
    pub p_outage: f64,
}

impl DecodeDistribution {
    /// `|Σ Pr{A_m} + p_outage - 1|`.
    pub fn closure_error(&self) -> f64 {
        (self.p_decode.iter().sum::<f64>() + self.p_outage - 1.0).abs()
    }

    pub fn rounds(&self) -> usize {
        self.p_decode.len()
    }
}

/// `Pr{A_m} = F(x_{m-1}) - F(x_m)` with `F(x_0) = 1`, outage `= F(x_{M+1})`.
pub fn decode_distribution<C: OmegaCdf + ?Sized>(
    config: &HarqConfig,
    omega: &C,
) -> Result<DecodeDistribution> {
    config.validate()?;
    let cdf: Vec<f64> = config
        .decode_thresholds()
        .into_iter()
        .map(|x| omega.omega_cdf(x))
        .collect::<Result<_>>()?;
    let mut previous = 1.0;
    let p_decode = cdf
        .iter()
        .map(|&f| {
            let p = previous - f;
            previous = f;
            p
        })
        .collect();
    Ok(DecodeDistribution {
        p_decode,
        p_outage: previous,
    })
}

fn check_rounds(config: &HarqConfig, dist: &DecodeDistribution) -> Result<()> {
    if dist.rounds() != config.m_max + 1 {
        return Err(Error::RateSchedule(format!(
            "decode distribution has {} rounds, config expects {}",
            dist.rounds(),
            config.m_max + 1
        )));
    }
    Ok(())
}

/// Continuous traffic: `η = Σ R_m Pr{A_m}`.
pub fn throughput_continuous(config: &HarqConfig, dist: &DecodeDistribution) -> Result<f64> {
    check_rounds(config, dist)?;
    Ok(config
        .rates()
        .iter()
        .zip(&dist.p_decode)
        .map(|(r, p)| r * p)
        .sum())
}

/// Bursting traffic:
/// `η = D(1 - P_out) / (Σ_m (Σ_{n<=m} l_n) Pr{A_m} + (Σ_n l_n) P_out)`.
pub fn throughput_bursting(config: &HarqConfig, dist: &DecodeDistribution) -> Result<f64> {
    check_rounds(config, dist)?;
    let cumulative = config.schedule.cumulative_lengths();
    let total = *cumulative.last().expect("at least one round");
    let expected_uses: f64 = cumulative
        .iter()
        .zip(&dist.p_decode)
        .map(|(l, p)| l * p)
        .sum::<f64>()
        + total * dist.p_outage;
    if expected_uses.is_nan() || expected_uses <= 0.0 {
        return Err(Error::RateSchedule(
            "expected channel uses per packet is zero".into(),
        ));
    }
    Ok(config.schedule.d_nats() * (1.0 - dist.p_outage) / expected_uses)
}

/// Closed-form outage and throughput of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerformanceReport {
    pub throughput_continuous: f64,
    pub throughput_bursting: f64,
    pub p_outage: f64,
    pub p_decode: Vec<f64>,
}

pub fn evaluate<C: OmegaCdf + ?Sized>(config: &HarqConfig, omega: &C) -> Result<PerformanceReport> {
    let dist = decode_distribution(config, omega)?;
    Ok(PerformanceReport {
        throughput_continuous: throughput_continuous(config, &dist)?,
        throughput_bursting: throughput_bursting(config, &dist)?,
        p_outage: dist.p_outage,
        p_decode: dist.p_decode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Unit-mean exponential Ω: a simple valid CDF.
    fn exp_cdf(x: f64) -> f64 {
        1.0 - (-x).exp()
    }

    #[test]
    fn single_round_protocols_coincide() {
        for protocol in [Protocol::Rtd, Protocol::Inr] {
            let cfg = HarqConfig::equal_length(protocol, 0, 0.5).unwrap();
            let d = decode_distribution(&cfg, &exp_cdf).unwrap();
            let f = exp_cdf(0.5f64.exp_m1());
            assert!((d.p_outage - f).abs() < 1e-15);
            assert!((d.p_decode[0] - (1.0 - f)).abs() < 1e-15);
            let cont = throughput_continuous(&cfg, &d).unwrap();
            let burst = throughput_bursting(&cfg, &d).unwrap();
            assert!((cont - 0.5 * (1.0 - f)).abs() < 1e-15);
            assert!((cont - burst).abs() < 1e-15);
        }
    }

    #[test]
    fn inr_thresholds_below_rtd() {
        let rtd = HarqConfig::equal_length(Protocol::Rtd, 1, 0.5).unwrap();
        let inr = HarqConfig::equal_length(Protocol::Inr, 1, 0.5).unwrap();
        let (tr, ti) = (rtd.decode_thresholds(), inr.decode_thresholds());
        assert_eq!(tr[0], ti[0]);
        assert!((ti[1] - 0.25f64.exp_m1()).abs() < 1e-15);
        assert!((tr[1] - 0.5f64.exp_m1() / 2.0).abs() < 1e-15);
        assert!(ti[1] <= tr[1]);
    }

    #[test]
    fn all_outage_gives_zero_throughput() {
        let cfg = HarqConfig::equal_length(Protocol::Inr, 2, 0.5).unwrap();
        let d = decode_distribution(&cfg, &|x: f64| if x > 0.0 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(d.p_outage, 1.0);
        assert_eq!(throughput_continuous(&cfg, &d).unwrap(), 0.0);
        assert_eq!(throughput_bursting(&cfg, &d).unwrap(), 0.0);
    }

    #[test]
    fn certain_first_round_gives_initial_rate() {
        let cfg = HarqConfig::equal_length(Protocol::Rtd, 2, 0.7).unwrap();
        let d = DecodeDistribution {
            p_decode: vec![1.0, 0.0, 0.0],
            p_outage: 0.0,
        };
        assert!((throughput_bursting(&cfg, &d).unwrap() - 0.7).abs() < 1e-15);
        assert!((throughput_continuous(&cfg, &d).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn schedule_validation() {
        assert!(RateSchedule::new(1.0, vec![]).is_err());
        assert!(RateSchedule::new(1.0, vec![1.0, 0.0]).is_err());
        assert!(RateSchedule::new(0.0, vec![1.0]).is_err());
        let uneven = RateSchedule::new(1.0, vec![2.0, 1.0]).unwrap();
        assert!(HarqConfig::new(Protocol::Rtd, 1, uneven.clone()).is_err());
        assert!(HarqConfig::new(Protocol::Inr, 1, uneven.clone()).is_ok());
        assert!(HarqConfig::new(Protocol::Inr, 2, uneven).is_err());
        let rates = RateSchedule::new(3.0, vec![1.0, 2.0]).unwrap().rates();
        assert_eq!(rates, vec![3.0, 1.0]);
    }

    #[test]
    fn mismatched_distribution_is_rejected() {
        let cfg = HarqConfig::equal_length(Protocol::Inr, 1, 0.5).unwrap();
        let d = DecodeDistribution {
            p_decode: vec![1.0],
            p_outage: 0.0,
        };
        assert!(throughput_continuous(&cfg, &d).is_err());
    }

    #[test]
    fn protocol_parsing() {
        assert_eq!("INR".parse::<Protocol>().unwrap(), Protocol::Inr);
        assert!("arq".parse::<Protocol>().is_err());
        assert_eq!(Protocol::Rtd.to_string(), "rtd");
    }
}
