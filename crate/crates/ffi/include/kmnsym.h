#ifndef KMNSYM_H
#define KMNSYM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KmnStatus {
  KMN_STATUS_OK = 0,
  KMN_STATUS_NULL_POINTER = 1,
  KMN_STATUS_INVALID_UTF8 = 2,
  KMN_STATUS_INVALID_SPEC = 3,
  KMN_STATUS_LINEAR_EQUATION = 4,
  KMN_STATUS_GUARD_VIOLATION = 5,
  KMN_STATUS_NUMERICS = 6,
  KMN_STATUS_OUT_OF_RANGE = 7,
  KMN_STATUS_INTERNAL = 8,
  /**
   * The call completed but a check it ran failed.
   */
  KMN_STATUS_CHECK_FAILED = 9,
} KmnStatus;

/**
 * A sampled solution of the reduced boundary-value problem.
 */
typedef struct KmnProfile KmnProfile;

/**
 * An equation `u_t + eps*(u^m)_x + f(t)*(u^n)_xxx = 0`.
 */
typedef struct KmnSpec KmnSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *kmn_last_error(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void kmn_string_free(char *s);

/**
 * Builds a spec from expression strings; `f` may be `"f"` for arbitrary f.
 *
 * # Safety
 * String arguments must be null-terminated; `out` must be writable.
 */
enum KmnStatus kmn_spec_new(const char *m,
                            const char *n,
                            int32_t eps,
                            const char *f,
                            struct KmnSpec **out);

/**
 * # Safety
 * `spec` must come from [`kmn_spec_new`] and not have been freed.
 */
void kmn_spec_free(struct KmnSpec *spec);

/**
 * JSON description of the matching table rows.
 *
 * # Safety
 * `spec` must be a live handle; `out` must be writable.
 */
enum KmnStatus kmn_classify_json(const struct KmnSpec *spec, char **out);

/**
 * Checks every generator of every matching row by prolongation.
 * `count` receives the number of generators checked.
 *
 * # Safety
 * `spec` must be a live handle; `count` may be null.
 */
enum KmnStatus kmn_verify(const struct KmnSpec *spec, size_t *count);

/**
 * Integrates the reduced boundary-value problem of a `t^k` spec with
 * `u(0, t) = gamma_num/gamma_den * t^c2` from `omega = 0` to `omega_end`.
 *
 * # Safety
 * `spec` must be a live handle; `out` must be writable.
 */
enum KmnStatus kmn_profile_solve(const struct KmnSpec *spec,
                                 int64_t gamma_num,
                                 int64_t gamma_den,
                                 double omega_end,
                                 double tol,
                                 struct KmnProfile **out);

/**
 * # Safety
 * `p` must come from [`kmn_profile_solve`] and not have been freed.
 */
void kmn_profile_free(struct KmnProfile *p);

/**
 * Number of stored samples; 0 for null.
 *
 * # Safety
 * `p` must be a live handle or null.
 */
size_t kmn_profile_len(const struct KmnProfile *p);

/**
 * Sample `i`: `omega` and `phi, phi', phi''` into `phi3[0..3]`.
 *
 * # Safety
 * `p` must be a live handle; `omega` and `phi3` (3 doubles) must be writable.
 */
enum KmnStatus kmn_profile_sample(const struct KmnProfile *p,
                                  size_t i,
                                  double *omega,
                                  double *phi3);

/**
 * Interpolated `phi(omega)`; zero past a compacton edge.
 *
 * # Safety
 * `p` must be a live handle; `phi` must be writable.
 */
enum KmnStatus kmn_profile_eval(const struct KmnProfile *p, double omega, double *phi);

/**
 * Runs the boundary-value cross-check. `config_json` holds any subset of
 * the pipeline settings (null for defaults); the report is written as JSON
 * to `out`. Returns `KMN_STATUS_CHECK_FAILED` when the relative
 * L-infinity discrepancy exceeds 1e-2, with the report still written.
 *
 * # Safety
 * `config_json` must be null or null-terminated; `out` must be writable.
 */
enum KmnStatus kmn_pipeline_json(const char *config_json, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KMNSYM_H */
