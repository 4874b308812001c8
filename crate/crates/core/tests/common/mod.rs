//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::path::PathBuf;

use underlay_harq::channel::ChannelParams;

/// Rows of a frozen reference table under `tests/data/`, header skipped.
pub fn load_table(name: &str) -> Vec<Vec<f64>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|v| v.trim().parse().unwrap()).collect())
        .collect()
}

/// Unit-mean fading, N0 = 1, P_p = 0.5.
pub fn unit_channel() -> ChannelParams {
    ChannelParams::unit(0.5).unwrap()
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

/// A random but valid analytic configuration.
pub struct RandomCase {
    pub omega: underlay_harq::analytics::OmegaDistribution,
    pub harq: underlay_harq::harq::HarqConfig,
}

/// `n` random configurations over both protocols, varied channel means,
/// finite and relaxed peak power, and (for INR) unequal round lengths.
pub fn random_cases(n: usize, seed: u64) -> Vec<RandomCase> {
    use rand::Rng;
    use underlay_harq::analytics::OmegaDistribution;
    use underlay_harq::harq::{HarqConfig, Protocol, RateSchedule};

    let mut rng = underlay_harq::channel::stream_rng(seed, 0);
    (0..n)
        .map(|k| {
            let mut log_uniform = |lo: f64, hi: f64| (rng.random_range(lo.ln()..hi.ln())).exp();
            let params = ChannelParams::new(
                log_uniform(0.2, 5.0),
                log_uniform(0.2, 5.0),
                log_uniform(0.2, 5.0),
                log_uniform(0.1, 5.0),
                log_uniform(0.1, 5.0),
            )
            .unwrap();
            let p_max = if k % 5 == 0 { f64::INFINITY } else { log_uniform(0.1, 20.0) };
            let i_p = log_uniform(0.05, 10.0);
            let rate = log_uniform(0.05, 3.0);
            let protocol = if k % 2 == 0 { Protocol::Rtd } else { Protocol::Inr };
            let m: usize = rng.random_range(0..=5);
            let schedule = if protocol == Protocol::Inr && k % 4 == 1 {
                let lengths: Vec<f64> = (0..=m).map(|_| rng.random_range(0.2..3.0)).collect();
                RateSchedule::new(rate * lengths[0], lengths).unwrap()
            } else {
                RateSchedule::equal_length(rate, m + 1).unwrap()
            };
            RandomCase {
                omega: OmegaDistribution::new(params, p_max, i_p).unwrap(),
                harq: HarqConfig::new(protocol, m, schedule).unwrap(),
            }
        })
        .collect()
}
