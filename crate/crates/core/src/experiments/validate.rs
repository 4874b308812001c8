//! Self-validation of a sweep config: closed forms against each other and
//! against Monte Carlo at a few representative grid points.

use serde::Serialize;

use crate::analytics::InterferenceDistribution;
use crate::channel::CsiModel;
use crate::error::Result;
use crate::harq::{decode_distribution, throughput_bursting, throughput_continuous, DecodeDistribution, Protocol};
use crate::montecarlo::{run_simulation, sample_channel, EmpiricalCdf, SimulationSpec, Traffic};
use crate::power::ThresholdSolution;

use super::sweep::{OperatingPoint, SweepSpec};

pub const CLOSURE_TOLERANCE: f64 = 1e-12;
/// Absolute slack for inequalities that must hold exactly on analytic values.
pub const ORDERING_SLACK: f64 = 1e-12;
/// Floor on the analytic-vs-MC throughput and outage discrepancy.
pub const MC_ABS_TOLERANCE: f64 = 0.003;
pub const MC_SIGMAS: f64 = 4.0;
pub const CDF_ABS_TOLERANCE: f64 = 0.005;
pub const CDF_GRID_POINTS: usize = 50;

/// One check. It passes when `value <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            // NaN never passes.
            passed: value <= tolerance,
            value,
            tolerance,
            detail: detail.into(),
        }
    }

    fn error(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: false,
            value: f64::NAN,
            tolerance: f64::NAN,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub config: String,
    pub n_packets: u64,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// `Σ Pr{A_m} + P_out = 1` to [`CLOSURE_TOLERANCE`].
pub fn check_probability_closure(name: &str, dist: &DecodeDistribution) -> CheckResult {
    CheckResult::new(
        format!("closure {name}"),
        dist.closure_error(),
        CLOSURE_TOLERANCE,
        format!("{} rounds, outage {:.6e}", dist.rounds(), dist.p_outage),
    )
}

/// `η_continuous >= (1 - P_out)·η_bursting`; `value` is the shortfall.
pub fn check_jensen(name: &str, continuous: f64, bursting: f64, outage: f64) -> CheckResult {
    CheckResult::new(
        format!("jensen {name}"),
        (1.0 - outage) * bursting - continuous,
        ORDERING_SLACK,
        format!("continuous {continuous:.6}, bursting {bursting:.6}, outage {outage:.6}"),
    )
}

/// Sup-norm of an empirical CDF against an analytic one on `CDF_GRID_POINTS`
/// points spread between the 0.5% and 99.5% sample quantiles.
fn sup_norm_check<F>(name: String, samples: &[f64], analytic: F) -> CheckResult
where
    F: FnMut(f64) -> Result<f64>,
{
    let n = samples.len();
    let tolerance = CDF_ABS_TOLERANCE.max(1.95 / (n as f64).sqrt());
    let outcome = EmpiricalCdf::new(samples).and_then(|ecdf| {
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let lo = sorted[n / 200];
        let hi = sorted[n - 1 - n / 200];
        let grid: Vec<f64> = (0..CDF_GRID_POINTS)
            .map(|k| lo + (hi - lo) * k as f64 / (CDF_GRID_POINTS - 1) as f64)
            .filter(|x| *x > 0.0)
            .collect();
        ecdf.sup_distance(&grid, analytic)
    });
    match outcome {
        Ok(d) => CheckResult::new(name, d, tolerance, format!("{n} samples, DKW-sized tolerance")),
        Err(e) => CheckResult::error(name, e.to_string()),
    }
}

fn point_label(p: &OperatingPoint, axis: impl std::fmt::Display) -> String {
    format!("[{axis}={} p_max={} i_p={}]", p.axis_value, p.p_max, p.i_p)
}

fn validate_point(spec: &SweepSpec, point: &OperatingPoint, n: u64, seed: u64) -> Vec<CheckResult> {
    let label = point_label(point, spec.axis);
    let mut checks = Vec::new();
    let threshold = match point.threshold() {
        Ok(ThresholdSolution::Infeasible) => {
            // Silent SU: nothing to compare, but the sentinel must be consistent.
            checks.push(CheckResult::new(
                format!("infeasible sentinel {label}"),
                0.0,
                0.0,
                "confidence target unreachable; SU silent",
            ));
            return checks;
        }
        Ok(sol) => sol.threshold().expect("feasible"),
        Err(e) => return vec![CheckResult::error(format!("threshold {label}"), e.to_string())],
    };
    let omega = match point.omega(threshold) {
        Ok(o) => o,
        Err(e) => return vec![CheckResult::error(format!("omega {label}"), e.to_string())],
    };

    let mut analytic = Vec::new();
    for &protocol in &spec.protocols {
        for &m in &spec.m_values {
            let name = format!("{protocol} M={m} {label}");
            let outcome = spec.harq(protocol, m).and_then(|harq| {
                let dist = decode_distribution(&harq, &omega)?;
                let cont = throughput_continuous(&harq, &dist)?;
                let burst = throughput_bursting(&harq, &dist)?;
                Ok((harq, dist, cont, burst))
            });
            match outcome {
                Ok((harq, dist, cont, burst)) => {
                    checks.push(check_probability_closure(&name, &dist));
                    checks.push(check_jensen(&name, cont, burst, dist.p_outage));
                    analytic.push((protocol, m, harq, dist.p_outage, cont, burst));
                }
                Err(e) => checks.push(CheckResult::error(format!("analytic {name}"), e.to_string())),
            }
        }
    }

    for &(_, m, _, rtd_out, rtd_cont, rtd_burst) in
        analytic.iter().filter(|a| a.0 == Protocol::Rtd)
    {
        if let Some(&(_, _, _, inr_out, inr_cont, inr_burst)) =
            analytic.iter().find(|a| a.0 == Protocol::Inr && a.1 == m)
        {
            let name = format!("inr>=rtd M={m} {label}");
            checks.push(CheckResult::new(
                name,
                (rtd_cont - inr_cont).max(rtd_burst - inr_burst).max(inr_out - rtd_out),
                ORDERING_SLACK,
                format!("throughput rtd {rtd_cont:.6} inr {inr_cont:.6}; outage rtd {rtd_out:.3e} inr {inr_out:.3e}"),
            ));
        }
    }

    if n == 0 {
        return checks;
    }

    let csi = match CsiModel::new(point.beta) {
        Ok(c) => c,
        Err(e) => return vec![CheckResult::error(format!("csi {label}"), e.to_string())],
    };
    let policy = point.policy(threshold);
    let samples = sample_channel(&point.channel, &csi, &policy, n, seed);
    checks.push(sup_norm_check(format!("omega cdf sup-norm {label}"), &samples.omega, |x| {
        omega.cdf_omega(x)
    }));
    match InterferenceDistribution::new(point.channel.mu_sp, point.p_max, threshold, point.beta) {
        Ok(interference) => checks.push(sup_norm_check(
            format!("interference cdf sup-norm {label}"),
            &samples.interference,
            |x| interference.cdf(x),
        )),
        Err(e) => checks.push(CheckResult::error(format!("interference {label}"), e.to_string())),
    }
    if !csi.is_perfect() {
        let ok = samples.interference.iter().filter(|&&phi| phi <= point.i_p).count();
        let p = ok as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        checks.push(CheckResult::new(
            format!("interference confidence {label}"),
            point.pi - p,
            3.0 * sigma,
            format!("empirical P(phi <= I_p) = {p:.6}, target pi = {}", point.pi),
        ));
    }

    for (protocol, m, harq, outage, cont, burst) in analytic {
        let name = format!("{protocol} M={m} {label}");
        let sim = run_simulation(&SimulationSpec {
            channel: point.channel,
            csi,
            policy,
            harq,
            n_packets: n,
            seed,
            traffic: Traffic::Continuous,
            retain_omega: false,
        });
        let report = match sim {
            Ok(r) => r,
            Err(e) => {
                checks.push(CheckResult::error(format!("mc {name}"), e.to_string()));
                continue;
            }
        };
        for (what, est, reference) in [
            ("continuous throughput", report.throughput_continuous, cont),
            ("bursting throughput", report.throughput_bursting, burst),
            ("outage", report.outage_rate, outage),
        ] {
            checks.push(CheckResult::new(
                format!("mc {what} {name}"),
                (est.value - reference).abs(),
                MC_ABS_TOLERANCE.max(MC_SIGMAS * est.std_error),
                format!("analytic {reference:.6}, mc {:.6} ± {:.2e}", est.value, est.std_error),
            ));
        }
    }
    checks
}

/// Runs every check at the first, middle and last grid points. `n = 0`
/// restricts validation to analytic-only checks.
pub fn run_validation(spec: &SweepSpec, n: u64, seed: u64) -> ValidationReport {
    let g = &spec.grid;
    let mut picks = vec![g[0], g[g.len() / 2], g[g.len() - 1]];
    picks.dedup();
    let checks: Vec<CheckResult> = picks
        .into_iter()
        .flat_map(|x| spec.points_at(x))
        .flat_map(|p| validate_point(spec, &p, n, seed))
        .collect();
    ValidationReport {
        config: spec.name.clone(),
        n_packets: n,
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
