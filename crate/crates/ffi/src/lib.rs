//! C ABI over `underlay-harq`.
//!
//! Conventions:
//! - every function returns a [`UhStatus`] and writes results through
//!   out-pointers, which are left untouched on failure;
//! - distributions and HARQ configurations are opaque handles created by
//!   `uh_*_new` and released by the matching `uh_*_free` (which accepts NULL);
//! - after a failure, [`uh_last_error_message`] returns a description that
//!   stays valid until the next failing call on the same thread;
//! - panics never cross the boundary; they surface as `UH_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use underlay_harq::analytics::{InterferenceDistribution, OmegaDistribution};
use underlay_harq::channel::{ChannelParams, CsiModel};
use underlay_harq::harq::{decode_distribution, evaluate, HarqConfig, Protocol, RateSchedule};
use underlay_harq::montecarlo::{run_simulation, SimulationSpec, Traffic};
use underlay_harq::power::{solve_effective_threshold, PowerPolicy, ThresholdSolution};
use underlay_harq::{specfun, Error};

/// Result code of every `uh_*` function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    DegenerateCsi = 4,
    Singular = 5,
    RateSchedule = 6,
    Infeasible = 7,
    Numerical = 8,
    Panic = 9,
}

/// How the confidence solver produced its threshold.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UhThresholdKind {
    /// The cap already holds with the requested confidence.
    Unchanged = 0,
    /// A tighter threshold was solved for.
    Tightened = 1,
    /// No positive threshold works; the secondary user must stay silent.
    Infeasible = 2,
}

pub const UH_PROTOCOL_RTD: u32 = 0;
pub const UH_PROTOCOL_INR: u32 = 1;

/// Average link gains, noise and primary transmit power (linear scale).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct UhChannelParams {
    pub mu_ss: f64,
    pub mu_ps: f64,
    pub mu_sp: f64,
    pub n0: f64,
    pub p_p: f64,
}

/// Power rule parameters; `p_max` may be `INFINITY`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct UhPowerPolicy {
    pub p_max: f64,
    pub i_p: f64,
    pub pi: f64,
    pub i_p_effective: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UhPerformance {
    pub throughput_continuous: f64,
    pub throughput_bursting: f64,
    pub p_outage: f64,
}

/// Monte Carlo estimates with their standard errors.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UhSimulationReport {
    pub n_packets: u64,
    pub throughput_continuous: f64,
    pub throughput_continuous_se: f64,
    pub throughput_bursting: f64,
    pub throughput_bursting_se: f64,
    pub outage: f64,
    pub outage_se: f64,
    pub interference_violation: f64,
    pub interference_violation_se: f64,
}

/// Opaque handle to the SINR distribution.
pub struct UhOmega(OmegaDistribution);

/// Opaque handle to the primary-user interference distribution.
pub struct UhInterference(InterferenceDistribution);

/// Opaque handle to a HARQ configuration.
pub struct UhHarq(HarqConfig);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

fn status_of(err: &Error) -> UhStatus {
    match err {
        Error::Domain { .. } => UhStatus::Domain,
        Error::InvalidParameter { .. } | Error::EmptySamples => UhStatus::InvalidArgument,
        Error::DegenerateCsi { .. } => UhStatus::DegenerateCsi,
        Error::Singular { .. } => UhStatus::Singular,
        Error::RateSchedule(_) => UhStatus::RateSchedule,
        Error::InfeasibleConfidence { .. } => UhStatus::Infeasible,
        Error::Quadrature { .. } => UhStatus::Numerical,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

/// Runs `body` behind `catch_unwind` and maps its outcome to a status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> UhStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => UhStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer passed for `{name}`"));
            UhStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            UhStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be NULL or valid for reads of `T`.
unsafe fn read<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

/// # Safety
/// `p` must be NULL or valid for writes of `T`.
unsafe fn write<T>(p: *mut T, value: T, name: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    p.write(value);
    Ok(())
}

fn channel(p: &UhChannelParams) -> Result<ChannelParams, Failure> {
    Ok(ChannelParams::new(p.mu_ss, p.mu_ps, p.mu_sp, p.n0, p.p_p)?)
}

fn protocol(code: u32) -> Result<Protocol, Failure> {
    match code {
        UH_PROTOCOL_RTD => Ok(Protocol::Rtd),
        UH_PROTOCOL_INR => Ok(Protocol::Inr),
        _ => Err(Failure::Lib(Error::InvalidParameter {
            name: "protocol",
            value: code as f64,
            reason: "expected UH_PROTOCOL_RTD or UH_PROTOCOL_INR",
        })),
    }
}

fn into_handle<T>(value: T, out: *mut *mut T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    // SAFETY: checked non-null; caller guarantees it is writable.
    unsafe { out.write(Box::into_raw(Box::new(value))) };
    Ok(())
}

/// Description of the last failure on this thread, or "" if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn uh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Static, human-readable name of a status code.
#[no_mangle]
pub extern "C" fn uh_status_name(status: UhStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        UhStatus::Ok => b"ok\0",
        UhStatus::NullPointer => b"null pointer\0",
        UhStatus::InvalidArgument => b"invalid argument\0",
        UhStatus::Domain => b"argument outside domain\0",
        UhStatus::DegenerateCsi => b"degenerate CSI model\0",
        UhStatus::Singular => b"singular evaluation\0",
        UhStatus::RateSchedule => b"invalid rate schedule\0",
        UhStatus::Infeasible => b"infeasible confidence target\0",
        UhStatus::Numerical => b"numerical failure\0",
        UhStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// `E1(x) = Γ(0, x)` for `x > 0`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uh_exp_integral_gamma0(x: f64, out: *mut f64) -> UhStatus {
    guard(|| write(out, specfun::exp_integral_gamma0(x)?, "out"))
}

/// Modified Bessel function `I0(x)` for `x >= 0`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uh_bessel_i0(x: f64, out: *mut f64) -> UhStatus {
    guard(|| write(out, specfun::bessel_i0(x)?, "out"))
}

/// `e^{-x} I0(x)` for `x >= 0`; never overflows.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uh_bessel_i0_scaled(x: f64, out: *mut f64) -> UhStatus {
    guard(|| write(out, specfun::bessel_i0_scaled(x)?, "out"))
}

/// First-order Marcum Q function for `a, b >= 0`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uh_marcum_q1(a: f64, b: f64, out: *mut f64) -> UhStatus {
    guard(|| write(out, specfun::marcum_q1(a, b)?, "out"))
}

/// Threshold to use in the power rule so that interference stays below
/// `i_p` with probability `pi`. On `UH_THRESHOLD_KIND_INFEASIBLE`,
/// `threshold` is set to 0.
///
/// # Safety
/// `threshold` and `kind` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uh_solve_effective_threshold(
    i_p: f64,
    pi: f64,
    p_max: f64,
    beta: f64,
    mu_sp: f64,
    threshold: *mut f64,
    kind: *mut UhThresholdKind,
) -> UhStatus {
    guard(|| {
        if threshold.is_null() {
            return Err(Failure::Null("threshold"));
        }
        if kind.is_null() {
            return Err(Failure::Null("kind"));
        }
        let (t, k) = match solve_effective_threshold(i_p, pi, p_max, beta, mu_sp)? {
            ThresholdSolution::Unchanged(t) => (t, UhThresholdKind::Unchanged),
            ThresholdSolution::Tightened(t) => (t, UhThresholdKind::Tightened),
            ThresholdSolution::Infeasible => (0.0, UhThresholdKind::Infeasible),
        };
        write(threshold, t, "threshold")?;
        write(kind, k, "kind")
    })
}

/// # Safety
/// `params` must be valid for reads; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uh_omega_new(
    params: *const UhChannelParams,
    p_max: f64,
    i_p_effective: f64,
    out: *mut *mut UhOmega,
) -> UhStatus {
    guard(|| {
        let params = channel(read(params, "params")?)?;
        into_handle(UhOmega(OmegaDistribution::new(params, p_max, i_p_effective)?), out)
    })
}

/// CDF of the SINR at `x >= 0`.
///
/// # Safety
/// `dist` must come from `uh_omega_new`; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uh_omega_cdf(dist: *const UhOmega, x: f64, out: *mut f64) -> UhStatus {
    guard(|| write(out, read(dist, "dist")?.0.cdf_omega(x)?, "out"))
}

/// CDF of the received signal power `P_s·g_ss` at `z >= 0`.
///
/// # Safety
/// `dist` must come from `uh_omega_new`; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uh_omega_cdf_z(dist: *const UhOmega, z: f64, out: *mut f64) -> UhStatus {
    guard(|| write(out, read(dist, "dist")?.0.cdf_z(z)?, "out"))
}

/// # Safety
/// `dist` must be NULL or come from `uh_omega_new`, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uh_omega_free(dist: *mut UhOmega) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Interference distribution; `i_p` is the threshold inside the power rule.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uh_interference_new(
    mu_sp: f64,
    p_max: f64,
    i_p: f64,
    beta: f64,
    out: *mut *mut UhInterference,
) -> UhStatus {
    guard(|| into_handle(UhInterference(InterferenceDistribution::new(mu_sp, p_max, i_p, beta)?), out))
}

/// # Safety
/// `dist` must come from `uh_interference_new`; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uh_interference_cdf(dist: *const UhInterference, x: f64, out: *mut f64) -> UhStatus {
    guard(|| write(out, read(dist, "dist")?.0.cdf(x)?, "out"))
}

/// Peak-power-free form; only meaningful for `0 < beta < 1`.
///
/// # Safety
/// `dist` must come from `uh_interference_new`; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uh_interference_relaxed_cdf(
    dist: *const UhInterference,
    x: f64,
    out: *mut f64,
) -> UhStatus {
    guard(|| write(out, read(dist, "dist")?.0.relaxed_cdf(x)?, "out"))
}

/// # Safety
/// `dist` must be NULL or come from `uh_interference_new`, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uh_interference_free(dist: *mut UhInterference) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// `m_max + 1` equal-length rounds with initial rate `rate` (nats per use).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uh_harq_new_equal_length(
    protocol_code: u32,
    m_max: usize,
    rate: f64,
    out: *mut *mut UhHarq,
) -> UhStatus {
    guard(|| into_handle(UhHarq(HarqConfig::equal_length(protocol(protocol_code)?, m_max, rate)?), out))
}

/// General schedule: `d_nats` per packet, `n_lengths = m_max + 1` round lengths.
///
/// # Safety
/// `lengths` must be valid for `n_lengths` reads; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uh_harq_new(
    protocol_code: u32,
    m_max: usize,
    d_nats: f64,
    lengths: *const f64,
    n_lengths: usize,
    out: *mut *mut UhHarq,
) -> UhStatus {
    guard(|| {
        if lengths.is_null() {
            return Err(Failure::Null("lengths"));
        }
        let lengths = std::slice::from_raw_parts(lengths, n_lengths).to_vec();
        let schedule = RateSchedule::new(d_nats, lengths)?;
        into_handle(UhHarq(HarqConfig::new(protocol(protocol_code)?, m_max, schedule)?), out)
    })
}

/// # Safety
/// `harq` must be NULL or come from a `uh_harq_new*` call, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uh_harq_free(harq: *mut UhHarq) {
    if !harq.is_null() {
        drop(Box::from_raw(harq));
    }
}

/// Closed-form throughput (both traffic models) and outage.
///
/// # Safety
/// Handles must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uh_evaluate(
    harq: *const UhHarq,
    omega: *const UhOmega,
    out: *mut UhPerformance,
) -> UhStatus {
    guard(|| {
        let r = evaluate(&read(harq, "harq")?.0, &read(omega, "omega")?.0)?;
        write(
            out,
            UhPerformance {
                throughput_continuous: r.throughput_continuous,
                throughput_bursting: r.throughput_bursting,
                p_outage: r.p_outage,
            },
            "out",
        )
    })
}

/// Per-round decode probabilities. `p_decode` must hold exactly `m_max + 1` values.
///
/// # Safety
/// Handles must be live; `p_decode` valid for `len` writes; `p_outage` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uh_decode_distribution(
    harq: *const UhHarq,
    omega: *const UhOmega,
    p_decode: *mut f64,
    len: usize,
    p_outage: *mut f64,
) -> UhStatus {
    guard(|| {
        let harq = &read(harq, "harq")?.0;
        if p_decode.is_null() {
            return Err(Failure::Null("p_decode"));
        }
        if p_outage.is_null() {
            return Err(Failure::Null("p_outage"));
        }
        if len != harq.m_max + 1 {
            return Err(Failure::Lib(Error::InvalidParameter {
                name: "len",
                value: len as f64,
                reason: "must equal m_max + 1",
            }));
        }
        let dist = decode_distribution(harq, &read(omega, "omega")?.0)?;
        ptr::copy_nonoverlapping(dist.p_decode.as_ptr(), p_decode, len);
        write(p_outage, dist.p_outage, "p_outage")
    })
}

/// Monte Carlo run of `n_packets` packets; deterministic for a given `seed`.
///
/// # Safety
/// Pointers must be valid; `harq` must be live.
#[no_mangle]
pub unsafe extern "C" fn uh_simulate(
    params: *const UhChannelParams,
    beta: f64,
    policy: *const UhPowerPolicy,
    harq: *const UhHarq,
    n_packets: u64,
    seed: u64,
    out: *mut UhSimulationReport,
) -> UhStatus {
    guard(|| {
        let p = read(policy, "policy")?;
        let r = run_simulation(&SimulationSpec {
            channel: channel(read(params, "params")?)?,
            csi: CsiModel::new(beta)?,
            policy: PowerPolicy {
                p_max: p.p_max,
                i_p: p.i_p,
                pi: p.pi,
                i_p_effective: p.i_p_effective,
            },
            harq: read(harq, "harq")?.0.clone(),
            n_packets,
            seed,
            traffic: Traffic::Continuous,
            retain_omega: false,
        })?;
        write(
            out,
            UhSimulationReport {
                n_packets: r.n_packets,
                throughput_continuous: r.throughput_continuous.value,
                throughput_continuous_se: r.throughput_continuous.std_error,
                throughput_bursting: r.throughput_bursting.value,
                throughput_bursting_se: r.throughput_bursting.std_error,
                outage: r.outage_rate.value,
                outage_se: r.outage_rate.std_error,
                interference_violation: r.interference_violation_rate.value,
                interference_violation_se: r.interference_violation_rate.std_error,
            },
            "out",
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn status_names_are_distinct() {
        let names: Vec<String> = (0..=9)
            .map(|code| {
                // SAFETY: every value in 0..=9 is a valid discriminant.
                let status: UhStatus = unsafe { std::mem::transmute(code as u32) };
                unsafe { CStr::from_ptr(uh_status_name(status)) }.to_string_lossy().into_owned()
            })
            .collect();
        let mut dedup = names.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), names.len());
    }

    #[test]
    fn errors_map_to_codes() {
        let mut v = 0.0;
        assert_eq!(unsafe { uh_exp_integral_gamma0(-1.0, &mut v) }, UhStatus::Domain);
        assert_eq!(unsafe { uh_exp_integral_gamma0(1.0, ptr::null_mut()) }, UhStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(uh_last_error_message()) };
        assert!(msg.to_string_lossy().contains("out"));
    }

    #[test]
    fn panics_are_contained() {
        assert_eq!(guard(|| panic!("boom")), UhStatus::Panic);
        let msg = unsafe { CStr::from_ptr(uh_last_error_message()) };
        assert!(msg.to_string_lossy().contains("boom"));
    }
}
