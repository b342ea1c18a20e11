#ifndef STROBO_H
#define STROBO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  STROBO_STATUS_OK = 0,
  STROBO_STATUS_NULL_POINTER = 1,
  STROBO_STATUS_INVALID_PARAMETER = 2,
  STROBO_STATUS_NO_EQUILIBRIUM = 3,
  STROBO_STATUS_INTEGRATION_FAILURE = 4,
  STROBO_STATUS_NO_SPIKE_REGIME = 5,
  STROBO_STATUS_BOUNDARY_ABSENT = 6,
  STROBO_STATUS_NO_ROOT = 7,
  STROBO_STATUS_ORDERING_VIOLATION = 8,
  STROBO_STATUS_DEGENERATE_BOUNDARY = 9,
  STROBO_STATUS_MONOTONICITY_VIOLATION = 10,
  STROBO_STATUS_ADDING_VIOLATION = 11,
  STROBO_STATUS_NUMERICAL = 12,
  STROBO_STATUS_CONFIG = 13,
  STROBO_STATUS_IO = 14,
  STROBO_STATUS_BUFFER_TOO_SMALL = 15,
  STROBO_STATUS_PANIC = 99,
} StroboStatus;

/**
 * Opaque periodic-orbit handle.
 */
typedef struct StroboOrbit StroboOrbit;

/**
 * Opaque stroboscopic-map handle.
 */
typedef struct StroboSystem StroboSystem;

/**
 * Fixed point of the map on branch `S_n`.
 */
typedef struct {
  double x_bar;
  uint32_t branch_n;
  double multiplier;
} StroboFixedPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *strobo_version(void);

/**
 * Copies the last error message of this thread into `buf` (capacity `cap`).
 * Returns the size needed including the terminator, or 0 when there is no
 * pending error. Nothing is written when `cap` is too small.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes.
 */
size_t strobo_last_error_message(char *buf, size_t cap);

/**
 * Builds a system from a family name (`linear`, `quintic`, `arctan`), its
 * parameters, the forcing `(A, d, T)` and the threshold `theta`.
 *
 * # Safety
 * `family` must be a NUL-terminated string, `params` valid for `n_params`
 * reads, and `out` a valid pointer. Release the handle with
 * [`strobo_system_free`].
 */
StroboStatus strobo_system_new(const char *family,
                               const double *params,
                               size_t n_params,
                               double amplitude,
                               double duty,
                               double period,
                               double theta,
                               StroboSystem **out_system);

/**
 * Releases a system handle. Null is ignored.
 *
 * # Safety
 * `system` must come from [`strobo_system_new`] and not be used afterwards.
 */
void strobo_system_free(StroboSystem *system);

/**
 * One application of the map: image of `x0` and the spike count.
 *
 * # Safety
 * All pointers must be valid.
 */
StroboStatus strobo_map_apply(const StroboSystem *system,
                              double x0,
                              double *out_x,
                              uint32_t *out_spikes);

/**
 * Boundary `Sigma_n`. `out_present` is false when it lies outside `[0, theta)`.
 *
 * # Safety
 * All pointers must be valid.
 */
StroboStatus strobo_sigma(const StroboSystem *system,
                          uint32_t n,
                          double *out_sigma,
                          bool *out_present);

/**
 * Lateral images `s_minus` and `s_plus` of the discontinuity.
 *
 * # Safety
 * All pointers must be valid.
 */
StroboStatus strobo_lateral_values(const StroboSystem *system, double *out_minus, double *out_plus);

/**
 * The map's fixed point, if any. `out_found` tells whether one exists.
 *
 * # Safety
 * All pointers must be valid.
 */
StroboStatus strobo_fixed_point(const StroboSystem *system,
                                StroboFixedPoint *out_point,
                                bool *out_found);

/**
 * Iterates from `x0` past `burn_in` steps and looks for a cycle of period at
 * most `max_period` closing within `tol`. `*out_orbit` is set to a new handle
 * when one is found and to null otherwise.
 *
 * # Safety
 * All pointers must be valid. Release the orbit with [`strobo_orbit_free`].
 */
StroboStatus strobo_detect_orbit(const StroboSystem *system,
                                 double x0,
                                 size_t burn_in,
                                 size_t max_period,
                                 double tol,
                                 StroboOrbit **out_orbit);

/**
 * Releases an orbit handle. Null is ignored.
 *
 * # Safety
 * `orbit` must come from [`strobo_detect_orbit`] and not be used afterwards.
 */
void strobo_orbit_free(StroboOrbit *orbit);

/**
 * Period of an orbit, or 0 for a null handle.
 *
 * # Safety
 * `orbit` must be null or a live handle.
 */
size_t strobo_orbit_period(const StroboOrbit *orbit);

/**
 * Copies the orbit points (starting from the smallest) and their spike
 * counts. Either buffer may be null. Fails with `BufferTooSmall` when
 * `cap` is below the period.
 *
 * # Safety
 * Non-null buffers must be valid for `cap` elements.
 */
StroboStatus strobo_orbit_points(const StroboOrbit *orbit,
                                 double *points,
                                 uint32_t *spikes,
                                 size_t cap);

/**
 * Exact firing number `eta = num / den` of the orbit.
 *
 * # Safety
 * All pointers must be valid.
 */
StroboStatus strobo_orbit_eta(const StroboOrbit *orbit, int64_t *out_num, int64_t *out_den);

/**
 * Copies the orbit's canonical `L`/`R` word. Returns the size needed
 * including the terminator; 0 for a null handle.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes.
 */
size_t strobo_orbit_word(const StroboOrbit *orbit, char *buf, size_t cap);

/**
 * Amplitude on a bifurcation curve (`A0`, `A<n>R`, `A<n>L`, `A<n>C`) at duty
 * cycle `duty`, using the system's field, period and threshold.
 *
 * # Safety
 * `kind` must be a NUL-terminated string; all pointers must be valid.
 */
StroboStatus strobo_solve_curve(const StroboSystem *system,
                                const char *kind,
                                double duty,
                                double *out_amplitude);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STROBO_H */
