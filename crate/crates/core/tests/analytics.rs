mod common;

use proptest::prelude::*;
use underlay_harq::analytics::{InterferenceDistribution, OmegaDistribution};
use underlay_harq::channel::{sample_gains, stream_rng, CsiModel};
use underlay_harq::montecarlo::{sample_channel, EmpiricalCdf};
use underlay_harq::power::PowerPolicy;
use underlay_harq::specfun::integrate;

const BIG_N: u64 = 10_000_000;

fn fig1_omega() -> OmegaDistribution {
    OmegaDistribution::new(common::unit_channel(), 2.0, 1.0).unwrap()
}

fn empirical_at(samples: &[f64], x: f64) -> f64 {
    samples.iter().filter(|&&v| v <= x).count() as f64 / samples.len() as f64
}

#[test]
fn cdf_z_edges() {
    let d = fig1_omega();
    assert_eq!(d.cdf_z(0.0).unwrap(), 0.0);
    assert!(d.cdf_z(-1.0).is_err());
    let loose = OmegaDistribution::new(common::unit_channel(), 2.0, 1e12).unwrap();
    for z in [0.1, 1.0, 5.0] {
        let peak_only = -(-z / 2.0_f64).exp_m1();
        assert!((loose.cdf_z(z).unwrap() - peak_only).abs() < 1e-9);
    }
}

#[test]
fn cdf_z_against_monte_carlo() {
    let params = common::unit_channel();
    let policy = PowerPolicy::direct(2.0, 1.0).unwrap();
    let csi = CsiModel::perfect();
    let mut rng = stream_rng(21, 0);
    let below = (0..BIG_N)
        .filter(|_| {
            let g = sample_gains(&params, &csi, &mut rng);
            policy.transmit_power(g.g_tilde_sp) * g.g_ss <= 1.0
        })
        .count();
    let empirical = below as f64 / BIG_N as f64;
    let analytic = fig1_omega().cdf_z(1.0).unwrap();
    assert!((analytic - empirical).abs() <= 0.001, "{analytic} vs {empirical}");
}

#[test]
fn cdf_omega_edges() {
    let d = fig1_omega();
    assert_eq!(d.cdf_omega(0.0).unwrap(), 0.0);
    assert!(d.cdf_omega(1e4).unwrap() >= 0.9995);
    assert!(d.cdf_omega(-0.1).is_err());
    assert!(d.cdf_omega(f64::NAN).is_err());
}

#[test]
fn cdf_omega_against_monte_carlo() {
    let policy = PowerPolicy::direct(2.0, 1.0).unwrap();
    let s = sample_channel(&common::unit_channel(), &CsiModel::perfect(), &policy, BIG_N, 22);
    let x = 0.5_f64.exp_m1();
    let empirical = empirical_at(&s.omega, x);
    let analytic = fig1_omega().cdf_omega(x).unwrap();
    assert!((analytic - empirical).abs() <= 0.001, "{analytic} vs {empirical}");
}

#[test]
fn cdf_omega_against_quadrature() {
    for (p_max, i) in [(2.0, 1.0), (0.5, 3.0), (10.0, 0.1), (f64::INFINITY, 1.0)] {
        let params = underlay_harq::channel::ChannelParams::new(1.3, 0.6, 0.9, 1.0, 2.0).unwrap();
        let d = OmegaDistribution::new(params, p_max, i).unwrap();
        for x in common::linspace(0.01, 8.0, 50) {
            let closed = d.cdf_omega(x).unwrap();
            let quad = d.cdf_omega_by_quadrature(x, 1e-12).unwrap();
            assert!((closed - quad).abs() <= 1e-6, "p_max {p_max}, x {x}: {closed} vs {quad}");
        }
    }
}

#[test]
fn perfect_csi_interference_never_exceeds_cap() {
    let d = InterferenceDistribution::new(1.0, 2.0, 1.0, 1.0).unwrap();
    assert_eq!(d.cdf(1.0).unwrap(), 1.0);
    assert_eq!(d.cdf(3.0).unwrap(), 1.0);
    // Below the cap only the peak-power arm contributes: P{2 g <= x}.
    assert!((d.cdf(0.5).unwrap() - (-(-0.25_f64).exp_m1())).abs() < 1e-15);
}

#[test]
fn interference_against_monte_carlo() {
    let csi = CsiModel::new(0.8).unwrap();
    let policy = PowerPolicy::direct(2.0, 1.0).unwrap();
    let s = sample_channel(&common::unit_channel(), &csi, &policy, BIG_N, 23);
    let empirical = empirical_at(&s.interference, 1.0);
    let analytic = InterferenceDistribution::new(1.0, 2.0, 1.0, 0.8).unwrap().cdf(1.0).unwrap();
    assert!((analytic - empirical).abs() <= 0.002, "{analytic} vs {empirical}");
}

#[test]
fn relaxed_against_monte_carlo() {
    let csi = CsiModel::new(0.8).unwrap();
    let policy = PowerPolicy::direct(1e8, 1.0).unwrap();
    let s = sample_channel(&common::unit_channel(), &csi, &policy, BIG_N, 24);
    let empirical = empirical_at(&s.interference, 1.0);
    let analytic = InterferenceDistribution::new(1.0, f64::INFINITY, 1.0, 0.8)
        .unwrap()
        .relaxed_cdf(1.0)
        .unwrap();
    assert!((analytic - empirical).abs() <= 0.002, "{analytic} vs {empirical}");
}

#[test]
fn near_relaxed_peak_matches_relaxed_form() {
    let full = InterferenceDistribution::new(1.0, 1e6, 1.0, 0.8).unwrap();
    for x in [0.5, 1.0, 2.0] {
        let a = full.cdf(x).unwrap();
        let b = full.relaxed_cdf(x).unwrap();
        assert!((a - b).abs() <= 1e-3, "x {x}: {a} vs {b}");
    }
}

#[test]
fn relaxed_weak_correlation_matches_independent_quadrature() {
    let i = 1.0;
    let d = InterferenceDistribution::new(1.0, f64::INFINITY, i, 1e-3).unwrap();
    for x in [0.2, 1.0, 3.0] {
        // P{(I/g̃)·g <= x} with independent unit exponentials.
        let oracle = integrate(|gt| (-gt).exp() * -(-x * gt / i).exp_m1(), 0.0, f64::INFINITY, 1e-13).unwrap();
        let v = d.relaxed_cdf(x).unwrap();
        assert!((v - oracle).abs() <= 1e-4, "x {x}: {v} vs {oracle}");
    }
}

#[test]
fn five_term_form_against_quadrature() {
    for (p_max, i, beta) in [(2.0, 1.0, 0.8), (0.7, 2.5, 0.3), (5.0, 0.4, 0.95), (1.0, 1.0, 0.5)] {
        let d = InterferenceDistribution::new(1.0, p_max, i, beta).unwrap();
        for x in common::linspace(0.05, 4.0, 20) {
            let closed = d.cdf(x).unwrap();
            let quad = d.cdf_by_quadrature(x, 1e-12).unwrap();
            assert!((closed - quad).abs() <= 1e-7, "{p_max} {i} {beta} x={x}: {closed} vs {quad}");
        }
    }
}

#[test]
fn independent_branch_against_quadrature() {
    let (p_max, i) = (2.0, 1.0);
    let d = InterferenceDistribution::new(1.0, p_max, i, 0.0).unwrap();
    for x in [0.3, 1.0, 2.5] {
        // g independent of g̃: P{P_s(g̃)·g <= x} = E[1 - e^{-x/P_s(g̃)}].
        let given = |gt: f64| (-gt).exp() * -(-x / p_max.min(i / gt)).exp_m1();
        let knee = i / p_max;
        let oracle = integrate(given, 0.0, knee, 1e-13).unwrap()
            + integrate(given, knee, f64::INFINITY, 1e-13).unwrap();
        assert!((d.cdf(x).unwrap() - oracle).abs() <= 1e-9);
    }
}

#[test]
fn sup_norm_against_empirical_cdfs() {
    for beta in [0.8, 1.0] {
        let csi = CsiModel::new(beta).unwrap();
        let policy = PowerPolicy::direct(2.0, 1.0).unwrap();
        let s = sample_channel(&common::unit_channel(), &csi, &policy, 1_000_000, 25);
        let grid = common::linspace(0.02, 3.0, 50);
        let omega = fig1_omega();
        let d_omega = EmpiricalCdf::new(&s.omega)
            .unwrap()
            .sup_distance(&grid, |x| omega.cdf_omega(x))
            .unwrap();
        let interference = InterferenceDistribution::new(1.0, 2.0, 1.0, beta).unwrap();
        let d_int = EmpiricalCdf::new(&s.interference)
            .unwrap()
            .sup_distance(&grid, |x| interference.cdf(x))
            .unwrap();
        assert!(d_omega <= 0.005, "beta {beta}: omega {d_omega}");
        assert!(d_int <= 0.005, "beta {beta}: interference {d_int}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn omega_cdf_is_a_cdf(
        p_max in 0.1f64..20.0,
        i in 0.05f64..10.0,
        p_p in 0.1f64..5.0,
        xs in proptest::collection::vec(1e-3f64..50.0, 2..20),
    ) {
        let params = underlay_harq::channel::ChannelParams::unit(p_p).unwrap();
        let d = OmegaDistribution::new(params, p_max, i).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let mut prev = 0.0;
        for x in xs {
            let v = d.cdf_omega(x).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v >= prev - 1e-12);
            prev = v;
        }
        prop_assert!(d.cdf_omega(1e4 * (1.0 + p_p)).unwrap() > 0.99);
    }

    #[test]
    fn interference_cdf_is_a_cdf(
        p_max in 0.1f64..20.0,
        i in 0.05f64..10.0,
        beta in 0.0f64..=1.0,
        relaxed in proptest::bool::ANY,
        xs in proptest::collection::vec(1e-3f64..20.0, 2..20),
    ) {
        let p_max = if relaxed { f64::INFINITY } else { p_max };
        let d = InterferenceDistribution::new(1.0, p_max, i, beta).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let mut prev = 0.0;
        for x in xs {
            let v = d.cdf(x).unwrap();
            prop_assert!((0.0..=1.0).contains(&v), "{}", v);
            prop_assert!(v >= prev - 1e-9, "x {}: {} < {}", x, v, prev);
            prev = v;
        }
        prop_assert!(d.cdf(1e4 * i).unwrap() > 0.99);
    }
}

#[test]
fn relaxed_cdf_monotone_on_grid() {
    let d = InterferenceDistribution::new(1.0, f64::INFINITY, 1.0, 0.8).unwrap();
    let grid = common::linspace(0.05, 5.0, 100);
    let values: Vec<f64> = grid.iter().map(|&x| d.relaxed_cdf(x).unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0]));
}
