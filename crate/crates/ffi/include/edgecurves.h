#ifndef EDGECURVES_H
#define EDGECURVES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum EcStatus {
  EC_STATUS_OK = 0,
  /**
   * A parameter was out of range.
   */
  EC_STATUS_INVALID_ARGUMENT = 1,
  /**
   * A solver failed or an invariant was violated.
   */
  EC_STATUS_NUMERICAL = 2,
  /**
   * A required pointer was null.
   */
  EC_STATUS_NULL_POINTER = 3,
  /**
   * An index was out of range.
   */
  EC_STATUS_OUT_OF_RANGE = 4,
  /**
   * An internal panic was caught.
   */
  EC_STATUS_PANIC = 5,
} EcStatus;

/**
 * Sampled dispersion curves.
 */
typedef struct EcCurves EcCurves;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty after a success.
 *
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *ec_last_error(void);

/**
 * Energy `λ` and slope `dλ/dξ` of branch `branch` at `(b, gamma, xi)`.
 *
 * # Safety
 * `out_lambda` and `out_slope` must be null or valid for writes.
 */
enum EcStatus ec_theta(double b,
                       double gamma,
                       int32_t branch,
                       double xi,
                       double *out_lambda,
                       double *out_slope);

/**
 * Sample `n_branches` curves on `steps` momenta from `xi_min` to `xi_max`.
 *
 * On success `*out_curves` owns a handle to release with [`ec_curves_free`].
 *
 * # Safety
 * `branches` must point to `n_branches` readable values;
 * `out_curves` must be valid for writes.
 */
enum EcStatus ec_curves_sweep(double b,
                              double gamma,
                              double xi_min,
                              double xi_max,
                              size_t steps,
                              const int32_t *branches,
                              size_t n_branches,
                              struct EcCurves **out_curves);

/**
 * Number of curves in the handle; 0 for null.
 *
 * # Safety
 * `curves` must be null or a live handle.
 */
size_t ec_curves_count(const struct EcCurves *curves);

/**
 * Samples per curve; 0 for null or an out-of-range curve.
 *
 * # Safety
 * `curves` must be null or a live handle.
 */
size_t ec_curves_len(const struct EcCurves *curves, size_t curve);

/**
 * Sample `index` of curve `curve`: momentum, energy, slope and the signed
 * branch index.
 *
 * # Safety
 * `curves` must be a live handle; output pointers must be valid for writes.
 */
enum EcStatus ec_curves_get(const struct EcCurves *curves,
                            size_t curve,
                            size_t index,
                            double *out_xi,
                            double *out_lambda,
                            double *out_slope,
                            int32_t *out_branch);

/**
 * Release a handle from [`ec_curves_sweep`]; null is ignored.
 *
 * # Safety
 * `curves` must be null or a handle not yet freed.
 */
void ec_curves_free(struct EcCurves *curves);

/**
 * Edge Hall conductance for the signed Landau levels `levels`.
 *
 * `delta <= 0` selects the default bump half-width. With `with_integral`
 * nonzero the quadrature is also run and stored in `*out_integral`;
 * otherwise `*out_integral` is NaN.
 *
 * # Safety
 * `levels` must point to `n_levels` readable values; output pointers must
 * be valid for writes.
 */
enum EcStatus ec_conductance(double b,
                             double gamma,
                             const int64_t *levels,
                             size_t n_levels,
                             double delta,
                             int32_t with_integral,
                             int64_t *out_integer,
                             double *out_integral);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EDGECURVES_H */
