#ifndef ASEP_FFI_H
#define ASEP_FFI_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum {
  ASEP_STATUS_OK = 0,
  ASEP_STATUS_NULL_POINTER = 1,
  ASEP_STATUS_INVALID_PARAMETER = 2,
  ASEP_STATUS_OUT_OF_RANGE = 3,
  ASEP_STATUS_CAP_EXCEEDED = 4,
  ASEP_STATUS_NUMERICAL_FAILURE = 5,
  ASEP_STATUS_PANIC = 6,
} AsepStatus;

/**
 * Sampler of the line hitting time of `zeta^1` from `zeta^0`.
 */
typedef struct AsepHitSampler AsepHitSampler;

/**
 * Exact transition law of the segment process from `xi^0`.
 */
typedef struct AsepMixing AsepMixing;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Crate version as a static NUL-terminated string.
 */
const char *asep_version(void);

/**
 * Message of the last failure on this thread, valid until the next failing
 * call on the same thread. Empty if nothing failed yet.
 */
const char *asep_last_error(void);

/**
 * `F_GUE(s)` by Nystrom discretisation with `nodes` Gauss-Legendre nodes.
 *
 * # Safety
 * `out` must be valid for a write of one `double`.
 */
AsepStatus asep_f_gue(double s, uintptr_t nodes, double *out);

/**
 * Sup-norm deviation of the exact walk/Mallows distribution identity with
 * jump rate `p = 1/(1+Q)`.
 *
 * # Safety
 * `out` must be valid for a write of one `double`.
 */
AsepStatus asep_hecke_deviation(uintptr_t s,
                                uintptr_t r,
                                uintptr_t m,
                                double q,
                                double t,
                                double *out);

/**
 * Build the exact chain on `N` sites with `k` particles and jump rate `p`.
 * At most `cap` states are allowed.
 *
 * # Safety
 * `out` must be valid for a write of one pointer.
 */
AsepStatus asep_mixing_new(uintptr_t n, uintptr_t k, double p, uint64_t cap, AsepMixing **out);

/**
 * Number of states of the chain.
 *
 * # Safety
 * `h` must come from [`asep_mixing_new`] and `out` be writable.
 */
AsepStatus asep_mixing_len(const AsepMixing *h, uintptr_t *out);

/**
 * Exact `||P_t(xi^0, .) - pi||_TV` for each of the `len` times.
 *
 * # Safety
 * `times` must point to `len` readable doubles and `out` to `len` writable ones.
 */
AsepStatus asep_mixing_tv(const AsepMixing *h, const double *times, uintptr_t len, double *out);

/**
 * # Safety
 * `h` must come from [`asep_mixing_new`] and not be used afterwards. Null is a no-op.
 */
void asep_mixing_free(AsepMixing *h);

/**
 * Create a seeded sampler of the line hitting time.
 *
 * # Safety
 * `out` must be valid for a write of one pointer.
 */
AsepStatus asep_hit_sampler_new(uintptr_t n,
                                uintptr_t k,
                                double p,
                                uint64_t seed,
                                AsepHitSampler **out);

/**
 * Draw one hitting time censored at `t_cap`. `hit` is set to 0 on censoring,
 * in which case `time` is `t_cap`.
 *
 * # Safety
 * `h` must come from [`asep_hit_sampler_new`]; `time` and `hit` must be writable.
 */
AsepStatus asep_hit_sampler_draw(AsepHitSampler *h, double t_cap, double *time, int32_t *hit);

/**
 * # Safety
 * `h` must come from [`asep_hit_sampler_new`] and not be used afterwards. Null is a no-op.
 */
void asep_hit_sampler_free(AsepHitSampler *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASEP_FFI_H */
