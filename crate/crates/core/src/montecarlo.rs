//! Packet-level Monte Carlo simulator, the brute-force reference for every
//! closed form in this crate.
//!
//! Each packet draws one block of gains, applies the power rule, computes
//! `Ω` once and runs the HARQ decode rule directly on mutual information:
//! RTD decodes at the first `m` with `ln(1 + mΩ) >= R`, INR at the first `m`
//! with `Σ_{n<=m} l_n ln(1 + Ω) >= D`. Nothing here reuses the threshold or
//! CDF code of [`crate::harq`] / [`crate::analytics`].
//!
//! Work is split into chunks of [`CHUNK_PACKETS`] packets; chunk `c` draws
//! from `stream_rng(seed, c)` and the tallies are merged in chunk order, so a
//! report depends only on the `SimulationSpec` and seed.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_gains, stream_rng, ChannelParams, CsiModel};
use crate::error::{Error, Result};
use crate::harq::{DecodeDistribution, HarqConfig, OmegaCdf, Protocol};
use crate::power::PowerPolicy;

pub const CHUNK_PACKETS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Traffic {
    /// Back-to-back packets within each fading block.
    Continuous,
    /// One packet per fading block.
    Bursting,
}

impl fmt::Display for Traffic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Continuous => "continuous",
            Self::Bursting => "bursting",
        })
    }
}

impl FromStr for Traffic {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "continuous" => Ok(Self::Continuous),
            "bursting" => Ok(Self::Bursting),
            other => Err(format!(
                "unknown traffic model `{other}` (expected continuous or bursting)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub channel: ChannelParams,
    pub csi: CsiModel,
    pub policy: PowerPolicy,
    pub harq: HarqConfig,
    pub n_packets: u64,
    pub seed: u64,
    /// Selects which throughput goes into [`SimulationReport::throughput_npcu`].
    pub traffic: Traffic,
    /// Keep every packet's `Ω` in the report.
    pub retain_omega: bool,
}

/// A Monte Carlo estimate and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    fn proportion(count: u64, n: u64) -> Self {
        let p = count as f64 / n as f64;
        Self {
            value: p,
            std_error: (p * (1.0 - p) / n as f64).sqrt(),
        }
    }

    /// `|value - reference| <= k·σ`.
    pub fn within_sigmas(&self, reference: f64, k: f64) -> bool {
        (self.value - reference).abs() <= k * self.std_error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub n_packets: u64,
    /// Throughput under the requested traffic model.
    pub throughput_npcu: Estimate,
    /// Mean per-packet equivalent rate `R_m` (0 on outage).
    pub throughput_continuous: Estimate,
    /// Delivered nats over channel uses spent.
    pub throughput_bursting: Estimate,
    pub outage_rate: Estimate,
    /// Fraction of packets decoded at round `m = 1..=M+1`.
    pub decode_histogram: Vec<Estimate>,
    /// Fraction of blocks with `φ_p > I_p`.
    pub interference_violation_rate: Estimate,
    #[serde(skip)]
    pub omega_samples: Option<Vec<f64>>,
}

impl SimulationReport {
    /// Empirical decode distribution, usable wherever the closed form is.
    pub fn decode_distribution(&self) -> DecodeDistribution {
        DecodeDistribution {
            p_decode: self.decode_histogram.iter().map(|e| e.value).collect(),
            p_outage: self.outage_rate.value,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    packets: u64,
    decoded: Vec<u64>,
    outages: u64,
    violations: u64,
    rate_sum: f64,
    rate_sq: f64,
    delivered_sum: f64,
    delivered_sq: f64,
    uses_sum: f64,
    uses_sq: f64,
    cross_sum: f64,
    omega: Vec<f64>,
}

impl Tally {
    fn new(rounds: usize) -> Self {
        Self {
            decoded: vec![0; rounds],
            ..Self::default()
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.packets += other.packets;
        for (a, b) in self.decoded.iter_mut().zip(&other.decoded) {
            *a += b;
        }
        self.outages += other.outages;
        self.violations += other.violations;
        self.rate_sum += other.rate_sum;
        self.rate_sq += other.rate_sq;
        self.delivered_sum += other.delivered_sum;
        self.delivered_sq += other.delivered_sq;
        self.uses_sum += other.uses_sum;
        self.uses_sq += other.uses_sq;
        self.cross_sum += other.cross_sum;
        self.omega.extend(other.omega);
        self
    }
}

/// Round (0-based) at which the packet is decoded, if any.
fn decode_round(harq: &HarqConfig, omega: f64) -> Option<usize> {
    let schedule = &harq.schedule;
    let rounds = harq.m_max + 1;
    match harq.protocol {
        Protocol::Rtd => {
            let rate = schedule.initial_rate();
            (0..rounds).find(|&m| ((m + 1) as f64).mul_add(omega, 1.0).ln() >= rate)
        }
        Protocol::Inr => {
            let per_use = omega.ln_1p();
            let mut info = 0.0;
            schedule.lengths().iter().position(|l| {
                info += l * per_use;
                info >= schedule.d_nats()
            })
        }
    }
}

fn chunk_ranges(n: u64) -> Vec<(u64, u64)> {
    (0..n.div_ceil(CHUNK_PACKETS))
        .map(|c| (c, CHUNK_PACKETS.min(n - c * CHUNK_PACKETS)))
        .collect()
}

fn simulate_chunk(spec: &SimulationSpec, chunk: u64, packets: u64, cumulative: &[f64]) -> Tally {
    let rounds = spec.harq.m_max + 1;
    let d = spec.harq.schedule.d_nats();
    let total_uses = cumulative[rounds - 1];
    let mut rng = stream_rng(spec.seed, chunk);
    let mut tally = Tally::new(rounds);
    if spec.retain_omega {
        tally.omega.reserve(packets as usize);
    }
    let ChannelParams { n0, p_p, .. } = spec.channel;
    for _ in 0..packets {
        let g = sample_gains(&spec.channel, &spec.csi, &mut rng);
        let p_s = spec.policy.transmit_power(g.g_tilde_sp);
        let omega = p_s * g.g_ss / (p_p * g.g_ps + n0);
        if spec.policy.violates(g.g_sp, g.g_tilde_sp) {
            tally.violations += 1;
        }
        let (rate, delivered, uses) = match decode_round(&spec.harq, omega) {
            Some(m) => {
                tally.decoded[m] += 1;
                (d / cumulative[m], d, cumulative[m])
            }
            None => {
                tally.outages += 1;
                (0.0, 0.0, total_uses)
            }
        };
        tally.rate_sum += rate;
        tally.rate_sq += rate * rate;
        tally.delivered_sum += delivered;
        tally.delivered_sq += delivered * delivered;
        tally.uses_sum += uses;
        tally.uses_sq += uses * uses;
        tally.cross_sum += delivered * uses;
        if spec.retain_omega {
            tally.omega.push(omega);
        }
    }
    tally.packets = packets;
    tally
}

pub fn run_simulation(spec: &SimulationSpec) -> Result<SimulationReport> {
    if spec.n_packets == 0 {
        return Err(Error::InvalidParameter {
            name: "n_packets",
            value: 0.0,
            reason: "must be >= 1",
        });
    }
    spec.channel.validate()?;
    spec.harq.validate()?;
    let cumulative = spec.harq.schedule.cumulative_lengths();

    let tallies: Vec<Tally> = chunk_ranges(spec.n_packets)
        .into_par_iter()
        .map(|(chunk, packets)| simulate_chunk(spec, chunk, packets, &cumulative))
        .collect();
    let rounds = spec.harq.m_max + 1;
    let t = tallies
        .into_iter()
        .fold(Tally::new(rounds), |acc, next| acc.merge(next));

    let n = t.packets as f64;
    let mean_rate = t.rate_sum / n;
    let continuous = Estimate {
        value: mean_rate,
        std_error: ((t.rate_sq / n - mean_rate * mean_rate).max(0.0) / n).sqrt(),
    };

    // Ratio estimator ΣD/ΣL with a delta-method standard error.
    let eta = t.delivered_sum / t.uses_sum;
    let mean_uses = t.uses_sum / n;
    let residual_sq = (t.delivered_sq - 2.0 * eta * t.cross_sum + eta * eta * t.uses_sq) / n;
    let bursting = Estimate {
        value: eta,
        std_error: (residual_sq.max(0.0) / n).sqrt() / mean_uses,
    };

    Ok(SimulationReport {
        n_packets: t.packets,
        throughput_npcu: match spec.traffic {
            Traffic::Continuous => continuous,
            Traffic::Bursting => bursting,
        },
        throughput_continuous: continuous,
        throughput_bursting: bursting,
        outage_rate: Estimate::proportion(t.outages, t.packets),
        decode_histogram: t
            .decoded
            .iter()
            .map(|&c| Estimate::proportion(c, t.packets))
            .collect(),
        interference_violation_rate: Estimate::proportion(t.violations, t.packets),
        omega_samples: spec.retain_omega.then_some(t.omega),
    })
}

/// Raw per-block samples of `Ω` and `φ_p`, for CDF comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSamples {
    pub omega: Vec<f64>,
    pub interference: Vec<f64>,
}

/// Draws `n` blocks with the same chunked stream layout as [`run_simulation`].
pub fn sample_channel(
    channel: &ChannelParams,
    csi: &CsiModel,
    policy: &PowerPolicy,
    n: u64,
    seed: u64,
) -> ChannelSamples {
    let parts: Vec<(Vec<f64>, Vec<f64>)> = chunk_ranges(n)
        .into_par_iter()
        .map(|(chunk, packets)| {
            let mut rng = stream_rng(seed, chunk);
            (0..packets)
                .map(|_| {
                    let g = sample_gains(channel, csi, &mut rng);
                    let p_s = policy.transmit_power(g.g_tilde_sp);
                    (
                        p_s * g.g_ss / (channel.p_p * g.g_ps + channel.n0),
                        policy.interference(g.g_sp, g.g_tilde_sp),
                    )
                })
                .unzip()
        })
        .collect();
    let mut out = ChannelSamples {
        omega: Vec::with_capacity(n as usize),
        interference: Vec::with_capacity(n as usize),
    };
    for (omega, interference) in parts {
        out.omega.extend(omega);
        out.interference.extend(interference);
    }
    out
}

/// Right-continuous empirical CDF over a sorted copy of the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    /// `max_x |F̂(x) - F(x)|` over the grid.
    pub fn sup_distance<F>(&self, grid: &[f64], mut reference: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        grid.iter().try_fold(0.0f64, |worst, &x| {
            Ok(worst.max((self.eval(x) - reference(x)?).abs()))
        })
    }
}

impl OmegaCdf for EmpiricalCdf {
    fn omega_cdf(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x))
    }
}

/// Empirical CDF of `samples` at each grid point.
pub fn empirical_cdf(samples: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    let cdf = EmpiricalCdf::new(samples)?;
    Ok(grid.iter().map(|&x| cdf.eval(x)).collect())
}
