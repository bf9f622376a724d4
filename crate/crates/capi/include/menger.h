/* C interface for the menger toolkit. Generated by cbindgen; do not edit. */

#pragma once

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of a C-ABI call.
 */
typedef enum MengerStatus {
  MENGER_STATUS_OK = 0,
  MENGER_STATUS_NULL_POINTER = 1,
  MENGER_STATUS_INVALID_ARGUMENT = 2,
  MENGER_STATUS_PARSE_ERROR = 3,
  MENGER_STATUS_IO_ERROR = 4,
  MENGER_STATUS_BUDGET_EXCEEDED = 5,
  MENGER_STATUS_ZERO_MASS_REGION = 6,
  MENGER_STATUS_DEGENERATE_INPUT = 7,
  MENGER_STATUS_UNSUPPORTED = 8,
  /**
   * The ball held too few points for a beta fit at this scale.
   */
  MENGER_STATUS_INSUFFICIENT_DATA = 9,
} MengerStatus;

/**
 * Opaque discrete measure handle.
 */
typedef struct MengerMeasure MengerMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version string of the library; static storage, do not free.
 */
const char *menger_version(void);

/**
 * Message of the last error raised on this thread, or NULL if none.
 * Valid until the next failing call on the same thread; do not free.
 */
const char *menger_last_error_message(void);

/**
 * Builds a measure from `count` points of `ambient_dim` coordinates
 * (row-major) and `count` weights. Returns NULL on error.
 *
 * # Safety
 * `coords` must point to `count * ambient_dim` doubles and `weights` to
 * `count` doubles.
 */
struct MengerMeasure *menger_measure_new(uintptr_t ambient_dim,
                                         uintptr_t intrinsic_dim,
                                         const double *coords,
                                         const double *weights,
                                         uintptr_t count);

/**
 * Parses the JSON point-cloud form
 * `{"m": int, "n": int, "points": [[...]], "weights": [...]}`.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string.
 */
struct MengerMeasure *menger_measure_from_json(const char *text);

/**
 * Reads the CSV point-cloud form (`x1,...,xm,weight` header) from a file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string.
 */
struct MengerMeasure *menger_measure_from_csv_file(const char *path, uintptr_t intrinsic_dim);

/**
 * Builds one of the synthetic fixtures from its JSON spec, e.g.
 * `{"kind": "circle", "count": 300, "radius": 1.0}`.
 *
 * # Safety
 * `spec_json` must be a valid NUL-terminated string.
 */
struct MengerMeasure *menger_measure_generate(const char *spec_json);

/**
 * Releases a measure handle. NULL is a no-op.
 *
 * # Safety
 * `handle` must come from a `menger_measure_*` constructor and must not be
 * used afterwards.
 */
void menger_measure_free(struct MengerMeasure *handle);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `ptr` must come from a menger call that allocates a string.
 */
void menger_string_free(char *ptr);

/**
 * Number of points in the measure; 0 for NULL.
 *
 * # Safety
 * `handle` must be a live measure handle or NULL.
 */
uintptr_t menger_measure_len(const struct MengerMeasure *handle);

/**
 * Total mass; NaN for NULL.
 *
 * # Safety
 * `handle` must be a live measure handle or NULL.
 */
double menger_measure_mass(const struct MengerMeasure *handle);

/**
 * Exact integral Menger curvature with integrand tag 1 (`K1`) or 2 (`K2`)
 * and exponent `p`.
 *
 * # Safety
 * `handle` must be a live measure handle; `out_value` must be writable.
 */
enum MengerStatus menger_integral_curvature(const struct MengerMeasure *handle,
                                            uint32_t integrand_tag,
                                            double p,
                                            double *out_value);

/**
 * Monte Carlo estimator of the integral curvature; fills the estimate and
 * its standard error. Deterministic for a fixed seed.
 *
 * # Safety
 * `handle` must be a live measure handle; both outputs must be writable.
 */
enum MengerStatus menger_monte_carlo_curvature(const struct MengerMeasure *handle,
                                               uint32_t integrand_tag,
                                               double p,
                                               uint64_t samples,
                                               uint64_t seed,
                                               double *out_value,
                                               double *out_stderr);

/**
 * Pointwise curvature at `x` and scale `r`.
 *
 * # Safety
 * `x` must point to `ambient_dim` doubles; `out_value` must be writable.
 */
enum MengerStatus menger_pointwise_curvature(const struct MengerMeasure *handle,
                                             const double *x,
                                             double r,
                                             uint32_t integrand_tag,
                                             double p,
                                             double *out_value);

/**
 * Exact Jones `beta_2(x, r)`.
 *
 * # Safety
 * `x` must point to `ambient_dim` doubles; `out_value` must be writable.
 */
enum MengerStatus menger_beta2(const struct MengerMeasure *handle,
                               const double *x,
                               double r,
                               double *out_value);

/**
 * Exact centered `beta^_2(x, r)` (plane constrained through `x`).
 *
 * # Safety
 * `x` must point to `ambient_dim` doubles; `out_value` must be writable.
 */
enum MengerStatus menger_centered_beta2(const struct MengerMeasure *handle,
                                        const double *x,
                                        double r,
                                        double *out_value);

/**
 * Multiscale beta profile on the geometric grid `r_j = ratio^j top_radius`,
 * `j = 0..count-1`, returned as a JSON document (center, radii, values,
 * flags, multiscale sum). Free the string with [`menger_string_free`].
 *
 * # Safety
 * `x` must point to `ambient_dim` doubles; `out_json` must be writable.
 */
enum MengerStatus menger_multiscale_beta_sum(const struct MengerMeasure *handle,
                                             const double *x,
                                             double top_radius,
                                             double ratio,
                                             uintptr_t count,
                                             bool centered,
                                             double p,
                                             char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
