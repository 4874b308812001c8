/* C interface to underlay-harq. Every function returns a UhStatus; on
 * failure uh_last_error_message() describes the problem. */

#ifndef UNDERLAY_HARQ_H
#define UNDERLAY_HARQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define UH_PROTOCOL_RTD 0

#define UH_PROTOCOL_INR 1

/*
 Result code of every `uh_*` function.
 */
typedef enum UhStatus {
  UH_STATUS_OK = 0,
  UH_STATUS_NULL_POINTER = 1,
  UH_STATUS_INVALID_ARGUMENT = 2,
  UH_STATUS_DOMAIN = 3,
  UH_STATUS_DEGENERATE_CSI = 4,
  UH_STATUS_SINGULAR = 5,
  UH_STATUS_RATE_SCHEDULE = 6,
  UH_STATUS_INFEASIBLE = 7,
  UH_STATUS_NUMERICAL = 8,
  UH_STATUS_PANIC = 9,
} UhStatus;

/*
 How the confidence solver produced its threshold.
 */
typedef enum UhThresholdKind {
  /*
   The cap already holds with the requested confidence.
   */
  UH_THRESHOLD_KIND_UNCHANGED = 0,
  /*
   A tighter threshold was solved for.
   */
  UH_THRESHOLD_KIND_TIGHTENED = 1,
  /*
   No positive threshold works; the secondary user must stay silent.
   */
  UH_THRESHOLD_KIND_INFEASIBLE = 2,
} UhThresholdKind;

/*
 Opaque handle to a HARQ configuration.
 */
typedef struct UhHarq UhHarq;

/*
 Opaque handle to the primary-user interference distribution.
 */
typedef struct UhInterference UhInterference;

/*
 Opaque handle to the SINR distribution.
 */
typedef struct UhOmega UhOmega;

/*
 Average link gains, noise and primary transmit power (linear scale).
 */
typedef struct UhChannelParams {
  double mu_ss;
  double mu_ps;
  double mu_sp;
  double n0;
  double p_p;
} UhChannelParams;

typedef struct UhPerformance {
  double throughput_continuous;
  double throughput_bursting;
  double p_outage;
} UhPerformance;

/*
 Power rule parameters; `p_max` may be `INFINITY`.
 */
typedef struct UhPowerPolicy {
  double p_max;
  double i_p;
  double pi;
  double i_p_effective;
} UhPowerPolicy;

/*
 Monte Carlo estimates with their standard errors.
 */
typedef struct UhSimulationReport {
  uint64_t n_packets;
  double throughput_continuous;
  double throughput_continuous_se;
  double throughput_bursting;
  double throughput_bursting_se;
  double outage;
  double outage_se;
  double interference_violation;
  double interference_violation_se;
} UhSimulationReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Description of the last failure on this thread, or "" if none.
 The pointer stays valid until the next failing call on this thread.
 */
const char *uh_last_error_message(void);

/*
 Static, human-readable name of a status code.
 */
const char *uh_status_name(enum UhStatus status);

/*
 `E1(x) = Γ(0, x)` for `x > 0`.

 # Safety
 `out` must be valid for writes.
 */
enum UhStatus uh_exp_integral_gamma0(double x, double *out);

/*
 Modified Bessel function `I0(x)` for `x >= 0`.

 # Safety
 `out` must be valid for writes.
 */
enum UhStatus uh_bessel_i0(double x, double *out);

/*
 `e^{-x} I0(x)` for `x >= 0`; never overflows.

 # Safety
 `out` must be valid for writes.
 */
enum UhStatus uh_bessel_i0_scaled(double x, double *out);

/*
 First-order Marcum Q function for `a, b >= 0`.

 # Safety
 `out` must be valid for writes.
 */
enum UhStatus uh_marcum_q1(double a, double b, double *out);

/*
 Threshold to use in the power rule so that interference stays below
 `i_p` with probability `pi`. On `UH_THRESHOLD_KIND_INFEASIBLE`,
 `threshold` is set to 0.

 # Safety
 `threshold` and `kind` must be valid for writes.
 */
enum UhStatus uh_solve_effective_threshold(double i_p,
                                           double pi,
                                           double p_max,
                                           double beta,
                                           double mu_sp,
                                           double *threshold,
                                           enum UhThresholdKind *kind);

/*
 # Safety
 `params` must be valid for reads; `out` valid for writes.
 */
enum UhStatus uh_omega_new(const struct UhChannelParams *params,
                           double p_max,
                           double i_p_effective,
                           struct UhOmega **out);

/*
 CDF of the SINR at `x >= 0`.

 # Safety
 `dist` must come from `uh_omega_new`; `out` valid for writes.
 */
enum UhStatus uh_omega_cdf(const struct UhOmega *dist, double x, double *out);

/*
 CDF of the received signal power `P_s·g_ss` at `z >= 0`.

 # Safety
 `dist` must come from `uh_omega_new`; `out` valid for writes.
 */
enum UhStatus uh_omega_cdf_z(const struct UhOmega *dist, double z, double *out);

/*
 # Safety
 `dist` must be NULL or come from `uh_omega_new`, and not be used afterwards.
 */
void uh_omega_free(struct UhOmega *dist);

/*
 Interference distribution; `i_p` is the threshold inside the power rule.

 # Safety
 `out` must be valid for writes.
 */
enum UhStatus uh_interference_new(double mu_sp,
                                  double p_max,
                                  double i_p,
                                  double beta,
                                  struct UhInterference **out);

/*
 # Safety
 `dist` must come from `uh_interference_new`; `out` valid for writes.
 */
enum UhStatus uh_interference_cdf(const struct UhInterference *dist, double x, double *out);

/*
 Peak-power-free form; only meaningful for `0 < beta < 1`.

 # Safety
 `dist` must come from `uh_interference_new`; `out` valid for writes.
 */
enum UhStatus uh_interference_relaxed_cdf(const struct UhInterference *dist, double x, double *out);

/*
 # Safety
 `dist` must be NULL or come from `uh_interference_new`, and not be used afterwards.
 */
void uh_interference_free(struct UhInterference *dist);

/*
 `m_max + 1` equal-length rounds with initial rate `rate` (nats per use).

 # Safety
 `out` must be valid for writes.
 */
enum UhStatus uh_harq_new_equal_length(uint32_t protocol_code,
                                       size_t m_max,
                                       double rate,
                                       struct UhHarq **out);

/*
 General schedule: `d_nats` per packet, `n_lengths = m_max + 1` round lengths.

 # Safety
 `lengths` must be valid for `n_lengths` reads; `out` valid for writes.
 */
enum UhStatus uh_harq_new(uint32_t protocol_code,
                          size_t m_max,
                          double d_nats,
                          const double *lengths,
                          size_t n_lengths,
                          struct UhHarq **out);

/*
 # Safety
 `harq` must be NULL or come from a `uh_harq_new*` call, and not be used afterwards.
 */
void uh_harq_free(struct UhHarq *harq);

/*
 Closed-form throughput (both traffic models) and outage.

 # Safety
 Handles must be live; `out` valid for writes.
 */
enum UhStatus uh_evaluate(const struct UhHarq *harq,
                          const struct UhOmega *omega,
                          struct UhPerformance *out);

/*
 Per-round decode probabilities. `p_decode` must hold exactly `m_max + 1` values.

 # Safety
 Handles must be live; `p_decode` valid for `len` writes; `p_outage` valid for writes.
 */
enum UhStatus uh_decode_distribution(const struct UhHarq *harq,
                                     const struct UhOmega *omega,
                                     double *p_decode,
                                     size_t len,
                                     double *p_outage);

/*
 Monte Carlo run of `n_packets` packets; deterministic for a given `seed`.

 # Safety
 Pointers must be valid; `harq` must be live.
 */
enum UhStatus uh_simulate(const struct UhChannelParams *params,
                          double beta,
                          const struct UhPowerPolicy *policy,
                          const struct UhHarq *harq,
                          uint64_t n_packets,
                          uint64_t seed,
                          struct UhSimulationReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UNDERLAY_HARQ_H */
