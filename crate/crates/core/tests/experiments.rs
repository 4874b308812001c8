use underlay_harq::analytics::OmegaDistribution;
use underlay_harq::channel::ChannelParams;
use underlay_harq::experiments::validate::check_probability_closure;
use underlay_harq::experiments::{run_sweep, run_validation, RowStatus, SweepSpec};
use underlay_harq::harq::{decode_distribution, DecodeDistribution, HarqConfig, Protocol};

/// Decode distribution built with the outage read one round early, `F(x_M)`
/// instead of `F(x_{M+1})`.
fn off_by_one(cfg: &HarqConfig, omega: &OmegaDistribution) -> DecodeDistribution {
    let x = cfg.decode_thresholds();
    let mut prev = 1.0;
    let p_decode = x
        .iter()
        .map(|&t| {
            let f = omega.cdf_omega(t).unwrap();
            let p = prev - f;
            prev = f;
            p
        })
        .collect();
    let m = cfg.m_max;
    let p_outage = if m == 0 { 1.0 } else { omega.cdf_omega(x[m - 1]).unwrap() };
    DecodeDistribution { p_decode, p_outage }
}

#[test]
fn closure_check_catches_off_by_one() {
    let omega = OmegaDistribution::new(ChannelParams::unit(0.5).unwrap(), 2.0, 1.0).unwrap();
    for protocol in [Protocol::Rtd, Protocol::Inr] {
        for m in 0..3 {
            let cfg = HarqConfig::equal_length(protocol, m, 0.5).unwrap();
            let good = decode_distribution(&cfg, &omega).unwrap();
            assert!(check_probability_closure("good", &good).passed);
            let bad = check_probability_closure("bad", &off_by_one(&cfg, &omega));
            assert!(!bad.passed, "{protocol} M={m}: {bad:?}");
        }
    }
}

#[test]
fn verdict_is_seed_stable() {
    for preset in ["fig1a", "fig2a"] {
        let spec = SweepSpec::from_preset(preset).unwrap();
        for seed in [1, 2, 3] {
            let report = run_validation(&spec, 300_000, seed);
            let failures: Vec<_> = report.failures().collect();
            assert!(report.passed, "{preset} seed {seed}: {failures:?}");
        }
    }
}

#[test]
fn rows_follow_grid_order() {
    let spec = SweepSpec::from_preset("fig2b").unwrap();
    let rows = run_sweep(&spec);
    let xs: Vec<f64> = rows.iter().map(|r| r.axis_value).collect();
    assert!(xs.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(rows.len(), spec.grid.len() * spec.p_max.len() * spec.protocols.len());
    assert!(rows.iter().all(|r| r.status == RowStatus::Ok));
}

#[test]
fn certainty_gives_throughput_zero_sentinel() {
    let mut spec = SweepSpec::from_preset("fig2a").unwrap();
    spec.grid = vec![0.9, 1.0];
    let rows = run_sweep(&spec);
    for row in rows {
        if row.axis_value == 1.0 {
            assert_eq!(row.status, RowStatus::Infeasible);
            assert_eq!(row.throughput_analytic, 0.0);
            assert_eq!(row.i_p_effective, None);
        } else {
            assert_eq!(row.status, RowStatus::Ok);
            assert!(row.throughput_analytic > 0.0);
        }
    }
}
