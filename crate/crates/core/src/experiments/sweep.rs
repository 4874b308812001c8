use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::OmegaDistribution;
use crate::channel::{ChannelParams, CsiModel};
use crate::error::Result;
use crate::harq::{evaluate, HarqConfig, Protocol, RateSchedule};
use crate::montecarlo::{run_simulation, SimulationReport, SimulationSpec, Traffic};
use crate::power::{solve_effective_threshold, PowerPolicy, ThresholdSolution};

use super::config::{ConfigError, Entry, RawConfig};

/// Parameter swept along the x-axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    IP,
    Pi,
    PP,
    PMax,
}

impl Axis {
    pub fn describe(&self) -> &'static str {
        match self {
            Self::IP => "i_p: PU interference cap (power, linear, relative to N0)",
            Self::Pi => "pi: required probability that PU interference stays below I_p",
            Self::PP => "p_p: PU transmit power (linear, relative to N0)",
            Self::PMax => "p_max: SU peak transmit power (linear, relative to N0)",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::IP => "i_p",
            Self::Pi => "pi",
            Self::PP => "p_p",
            Self::PMax => "p_max",
        })
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i_p" => Ok(Self::IP),
            "pi" => Ok(Self::Pi),
            "p_p" => Ok(Self::PP),
            "p_max" => Ok(Self::PMax),
            other => Err(format!(
                "unknown axis `{other}` (expected i_p, pi, p_p or p_max)"
            )),
        }
    }
}

/// A parameter sweep: every combination of the listed series is evaluated
/// at each grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub channel: ChannelParams,
    pub beta: f64,
    pub p_max: Vec<f64>,
    pub i_p: Vec<f64>,
    pub pi: f64,
    pub protocols: Vec<Protocol>,
    pub m_values: Vec<usize>,
    pub rate: f64,
    /// Explicit INR round lengths; equal lengths when absent.
    pub lengths: Option<Vec<f64>>,
    pub traffic: Vec<Traffic>,
    pub mc_packets: u64,
    pub seed: u64,
}

/// One fully specified operating point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub axis_value: f64,
    pub channel: ChannelParams,
    pub beta: f64,
    pub p_max: f64,
    pub i_p: f64,
    pub pi: f64,
}

impl OperatingPoint {
    /// Threshold used in the power rule; `Infeasible` means the SU must stay silent.
    pub fn threshold(&self) -> Result<ThresholdSolution> {
        solve_effective_threshold(self.i_p, self.pi, self.p_max, self.beta, self.channel.mu_sp)
    }

    pub fn policy(&self, threshold: f64) -> PowerPolicy {
        PowerPolicy {
            p_max: self.p_max,
            i_p: self.i_p,
            pi: self.pi,
            i_p_effective: threshold,
        }
    }

    pub fn omega(&self, threshold: f64) -> Result<OmegaDistribution> {
        OmegaDistribution::new(self.channel, self.p_max, threshold)
    }
}

fn parse_grid(entry: &Entry) -> std::result::Result<Vec<f64>, ConfigError> {
    let words: Vec<&str> = entry.value.split_whitespace().collect();
    let grid = match words.first().map(|w| w.to_ascii_lowercase()) {
        Some(kind) if kind == "log" || kind == "lin" => {
            if words.len() != 4 {
                return Err(entry.error(format!("expected `{kind} <start> <stop> <count>`")));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| entry.error(format!("expected a number, got `{s}`")))
            };
            let (start, stop) = (num(words[1])?, num(words[2])?);
            let count: usize = words[3]
                .parse()
                .map_err(|_| entry.error(format!("expected a count, got `{}`", words[3])))?;
            if count < 2 {
                return Err(entry.error("grid needs at least 2 points"));
            }
            if kind == "log" && !(start > 0.0 && stop > 0.0) {
                return Err(entry.error("log grid needs positive endpoints"));
            }
            (0..count)
                .map(|k| {
                    let f = k as f64 / (count - 1) as f64;
                    if kind == "log" {
                        start * (stop / start).powf(f)
                    } else {
                        start + (stop - start) * f
                    }
                })
                .collect()
        }
        _ => entry.f64_list()?,
    };
    if grid.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(entry.error("grid must be strictly increasing"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(entry.error("grid values must be finite"));
    }
    Ok(grid)
}

const KNOWN_KEYS: &[(&str, &[&str])] = &[
    ("sweep", &["name", "axis", "grid"]),
    ("channel", &["mu_ss", "mu_ps", "mu_sp", "n0", "p_p"]),
    ("csi", &["beta"]),
    ("policy", &["p_max", "i_p", "pi"]),
    ("harq", &["protocols", "m", "rate", "lengths"]),
    ("traffic", &["models"]),
    ("mc", &["packets", "seed"]),
];

impl SweepSpec {
    pub fn from_config(raw: &RawConfig) -> std::result::Result<Self, ConfigError> {
        for (section, key, entry) in raw.entries() {
            let known = KNOWN_KEYS
                .iter()
                .find(|(s, _)| *s == section)
                .map(|(_, keys)| keys.contains(&key));
            match known {
                None => return Err(entry.error(format!("unknown section [{section}]"))),
                Some(false) => {
                    return Err(entry.error(format!("unknown key `{key}` in [{section}]")))
                }
                Some(true) => {}
            }
        }

        let positive = |section: &str, key: &str| -> std::result::Result<f64, ConfigError> {
            let e = raw.require(section, key)?;
            let v = e.f64()?;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(e.error(format!("`{key}` must be finite and > 0")))
            }
        };
        let positive_list = |section: &str, key: &str, allow_inf: bool| {
            let e = raw.require(section, key)?;
            let values = e.f64_list()?;
            if values
                .iter()
                .any(|v| v.is_nan() || *v <= 0.0 || (!allow_inf && v.is_infinite()))
            {
                return Err(e.error(format!("`{key}` values must be > 0")));
            }
            Ok::<_, ConfigError>(values)
        };

        let axis_entry = raw.require("sweep", "axis")?;
        let axis: Axis = axis_entry.value.parse().map_err(|m: String| axis_entry.error(m))?;
        let grid_entry = raw.require("sweep", "grid")?;
        let grid = parse_grid(grid_entry)?;
        let grid_ok = match axis {
            Axis::Pi => grid.iter().all(|v| (0.0..=1.0).contains(v)),
            _ => grid.iter().all(|v| *v > 0.0),
        };
        if !grid_ok {
            return Err(grid_entry.error(format!("grid values out of range for axis {axis}")));
        }

        let channel = ChannelParams {
            mu_ss: positive("channel", "mu_ss")?,
            mu_ps: positive("channel", "mu_ps")?,
            mu_sp: positive("channel", "mu_sp")?,
            n0: positive("channel", "n0")?,
            p_p: positive("channel", "p_p")?,
        };

        let beta_entry = raw.require("csi", "beta")?;
        let beta = beta_entry.f64()?;
        CsiModel::new(beta).map_err(|e| beta_entry.error(e.to_string()))?;

        let pi_entry = raw.require("policy", "pi")?;
        let pi = pi_entry.f64()?;
        if !(0.0..=1.0).contains(&pi) {
            return Err(pi_entry.error("`pi` must lie in [0, 1]"));
        }

        let protocols_entry = raw.require("harq", "protocols")?;
        let protocols = protocols_entry.protocols()?;
        let m_entry = raw.require("harq", "m")?;
        let m_values = m_entry.usize_list()?;
        let rate = positive("harq", "rate")?;
        let lengths = match raw.get("harq", "lengths") {
            None => None,
            Some(e) => {
                let lengths = e.f64_list()?;
                if m_values != [lengths.len() - 1] {
                    return Err(e.error("explicit lengths need a single `m` equal to len - 1"));
                }
                if protocols.contains(&Protocol::Rtd) && lengths.iter().any(|l| *l != lengths[0]) {
                    return Err(e.error("RTD requires equal round lengths"));
                }
                Some(lengths)
            }
        };

        let spec = Self {
            name: raw
                .get("sweep", "name")
                .map(|e| e.value.clone())
                .unwrap_or_else(|| raw.origin.clone()),
            axis,
            grid,
            channel,
            beta,
            p_max: positive_list("policy", "p_max", true)?,
            i_p: positive_list("policy", "i_p", false)?,
            pi,
            protocols,
            m_values,
            rate,
            lengths,
            traffic: raw.require("traffic", "models")?.traffic()?,
            mc_packets: raw.get("mc", "packets").map(Entry::u64).transpose()?.unwrap_or(0),
            seed: raw.get("mc", "seed").map(Entry::u64).transpose()?.unwrap_or(1),
        };
        // Catch schedule problems before any sweeping.
        for &protocol in &spec.protocols {
            for &m in &spec.m_values {
                spec.harq(protocol, m).map_err(|e| m_entry.error(e.to_string()))?;
            }
        }
        Ok(spec)
    }

    pub fn from_preset(name: &str) -> std::result::Result<Self, ConfigError> {
        Self::from_config(&RawConfig::from_preset(name)?)
    }

    pub fn harq(&self, protocol: Protocol, m: usize) -> Result<HarqConfig> {
        match &self.lengths {
            Some(lengths) => {
                // Initial rate applies to the first round.
                let schedule = RateSchedule::new(self.rate * lengths[0], lengths.clone())?;
                HarqConfig::new(protocol, m, schedule)
            }
            None => HarqConfig::equal_length(protocol, m, self.rate),
        }
    }

    /// Operating points at one grid value, one per (p_max, i_p) series pair.
    pub fn points_at(&self, axis_value: f64) -> Vec<OperatingPoint> {
        let p_max: &[f64] = if self.axis == Axis::PMax {
            std::slice::from_ref(&axis_value)
        } else {
            &self.p_max
        };
        let i_p: &[f64] = if self.axis == Axis::IP {
            std::slice::from_ref(&axis_value)
        } else {
            &self.i_p
        };
        let mut points = Vec::new();
        for &pm in p_max {
            for &ip in i_p {
                let mut channel = self.channel;
                if self.axis == Axis::PP {
                    channel.p_p = axis_value;
                }
                points.push(OperatingPoint {
                    axis_value,
                    channel,
                    beta: self.beta,
                    p_max: pm,
                    i_p: ip,
                    pi: if self.axis == Axis::Pi { axis_value } else { self.pi },
                });
            }
        }
        points
    }
}

/// Monte Carlo columns of a sweep row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McColumns {
    pub throughput: f64,
    pub throughput_se: f64,
    pub outage: f64,
    pub outage_se: f64,
    pub interference_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    /// Confidence target unreachable; the SU is silent.
    Infeasible,
    Error(String),
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ok => f.write_str("ok"),
            Self::Infeasible => f.write_str("infeasible"),
            // Keep the CSV single-field: no commas or newlines.
            Self::Error(msg) => write!(f, "error: {}", msg.replace([',', '\n', '\r'], ";")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub protocol: Protocol,
    pub traffic: Traffic,
    pub m: usize,
    pub throughput_analytic: f64,
    pub outage_analytic: f64,
    pub mc: Option<McColumns>,
    pub p_max: f64,
    pub i_p: f64,
    pub pi: f64,
    pub i_p_effective: Option<f64>,
    pub status: RowStatus,
}

fn mc_columns(report: &SimulationReport, traffic: Traffic) -> McColumns {
    let throughput = match traffic {
        Traffic::Continuous => report.throughput_continuous,
        Traffic::Bursting => report.throughput_bursting,
    };
    McColumns {
        throughput: throughput.value,
        throughput_se: throughput.std_error,
        outage: report.outage_rate.value,
        outage_se: report.outage_rate.std_error,
        interference_violation: report.interference_violation_rate.value,
    }
}

fn evaluate_point(spec: &SweepSpec, point: &OperatingPoint) -> Vec<SweepRow> {
    let threshold = point.threshold();
    let mut rows = Vec::new();
    for &protocol in &spec.protocols {
        for &traffic in &spec.traffic {
            for &m in &spec.m_values {
                rows.push(SweepRow {
                    axis_value: point.axis_value,
                    protocol,
                    traffic,
                    m,
                    throughput_analytic: f64::NAN,
                    outage_analytic: f64::NAN,
                    mc: None,
                    p_max: point.p_max,
                    i_p: point.i_p,
                    pi: point.pi,
                    i_p_effective: None,
                    status: RowStatus::Ok,
                });
            }
        }
    }

    let threshold = match threshold {
        Ok(ThresholdSolution::Infeasible) => {
            for row in &mut rows {
                row.throughput_analytic = 0.0;
                row.outage_analytic = 1.0;
                row.status = RowStatus::Infeasible;
            }
            return rows;
        }
        Ok(solution) => solution.threshold().expect("feasible"),
        Err(e) => {
            for row in &mut rows {
                row.status = RowStatus::Error(e.to_string());
            }
            return rows;
        }
    };

    let omega = point.omega(threshold);
    for row in &mut rows {
        row.i_p_effective = Some(threshold);
        let outcome = omega.as_ref().map_err(Clone::clone).and_then(|omega| {
            let harq = spec.harq(row.protocol, row.m)?;
            evaluate(&harq, omega)
        });
        match outcome {
            Ok(perf) => {
                row.throughput_analytic = match row.traffic {
                    Traffic::Continuous => perf.throughput_continuous,
                    Traffic::Bursting => perf.throughput_bursting,
                };
                row.outage_analytic = perf.p_outage;
            }
            Err(e) => row.status = RowStatus::Error(e.to_string()),
        }
    }

    if spec.mc_packets > 0 {
        let csi = CsiModel::new(point.beta).expect("validated beta");
        let policy = point.policy(threshold);
        // Common random numbers: every configuration at this point uses the same seed.
        let mut reports = Vec::new();
        for &protocol in &spec.protocols {
            for &m in &spec.m_values {
                let report = spec.harq(protocol, m).and_then(|harq| {
                    run_simulation(&SimulationSpec {
                        channel: point.channel,
                        csi,
                        policy,
                        harq,
                        n_packets: spec.mc_packets,
                        seed: spec.seed,
                        traffic: Traffic::Continuous,
                        retain_omega: false,
                    })
                });
                reports.push(((protocol, m), report));
            }
        }
        for row in &mut rows {
            let (_, report) = reports
                .iter()
                .find(|(key, _)| *key == (row.protocol, row.m))
                .expect("simulated every combination");
            match report {
                Ok(report) => row.mc = Some(mc_columns(report, row.traffic)),
                Err(e) => row.status = RowStatus::Error(e.to_string()),
            }
        }
    }
    rows
}

/// Evaluates every grid point (in parallel) and returns rows in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Vec<SweepRow> {
    spec.grid
        .par_iter()
        .map(|&x| {
            spec.points_at(x)
                .iter()
                .flat_map(|p| evaluate_point(spec, p))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub const CSV_COLUMNS: &[&str] = &[
    "axis_value",
    "protocol",
    "traffic_model",
    "M",
    "throughput_analytic",
    "outage_analytic",
    "throughput_mc",
    "throughput_mc_se",
    "outage_mc",
    "outage_mc_se",
    "interference_violation_mc",
    "p_max",
    "i_p",
    "pi",
    "i_p_effective",
    "status",
];

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

/// Writes `#` comment lines, the header, then one line per row.
pub fn write_csv<W: Write>(spec: &SweepSpec, rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "# sweep: {}", spec.name)?;
    writeln!(out, "# axis: {}", spec.axis.describe())?;
    writeln!(
        out,
        "# units: throughput in nats per channel use (npcu); outage and violation are probabilities; powers linear with N0 = {}",
        spec.channel.n0
    )?;
    writeln!(
        out,
        "# mc: {} packets per configuration, seed {}; *_se are standard errors; mc columns empty when disabled",
        spec.mc_packets, spec.seed
    )?;
    writeln!(out, "{}", CSV_COLUMNS.join(","))?;
    for row in rows {
        let mc = row.mc.map_or_else(
            || vec![String::new(); 5],
            |mc| {
                vec![
                    num(mc.throughput),
                    num(mc.throughput_se),
                    num(mc.outage),
                    num(mc.outage_se),
                    num(mc.interference_violation),
                ]
            },
        );
        let fields = [
            num(row.axis_value),
            row.protocol.to_string(),
            row.traffic.to_string(),
            row.m.to_string(),
            num(row.throughput_analytic),
            num(row.outage_analytic),
        ]
        .into_iter()
        .chain(mc)
        .chain([
            num(row.p_max),
            num(row.i_p),
            num(row.pi),
            row.i_p_effective.map(num).unwrap_or_default(),
            row.status.to_string(),
        ]);
        writeln!(out, "{}", fields.collect::<Vec<_>>().join(","))?;
    }
    Ok(())
}
