#ifndef BOTTLENECK_LAB_H
#define BOTTLENECK_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum BlStatus {
  BL_STATUS_OK = 0,
  BL_STATUS_NULL_POINTER = 1,
  BL_STATUS_INVALID_UTF8 = 2,
  BL_STATUS_VALIDATION = 3,
  BL_STATUS_DIMENSION = 4,
  BL_STATUS_INFEASIBLE = 5,
  BL_STATUS_SCALE_LIMIT = 6,
  BL_STATUS_NUMERICAL = 7,
  BL_STATUS_IO = 8,
  BL_STATUS_OUT_OF_RANGE = 9,
  BL_STATUS_PANIC = 10,
} BlStatus;

typedef enum BlCurveKind {
  /**
   * `R(a)`: minimal compression at relevant information `a`.
   */
  BL_CURVE_KIND_IB = 0,
  /**
   * `I_Y(R)`.
   */
  BL_CURVE_KIND_IB_DUAL = 1,
  /**
   * `G(t)`.
   */
  BL_CURVE_KIND_PF = 2,
  /**
   * `P(a)`.
   */
  BL_CURVE_KIND_PF_DUAL = 3,
} BlCurveKind;

typedef struct BlCurve BlCurve;

typedef struct BlRegion BlRegion;

/**
 * Density operator on `X ⊗ Y`.
 */
typedef struct BlState BlState;

/**
 * Solver settings. Zero `d_w`/`d_v` select the defaults.
 */
typedef struct BlSolverConfig {
  size_t restarts;
  uint64_t seed;
  size_t max_iters;
  size_t d_w;
  size_t d_v;
  /**
   * Log-spaced multiplier grid `[beta_lo, beta_hi]` with `beta_count` points.
   */
  double beta_lo;
  double beta_hi;
  size_t beta_count;
  /**
   * Nonzero: solve the classical problem on the diagonal of the state.
   */
  int classical;
  /**
   * Nonzero: rescale the curve to the unit square.
   */
  int normalize;
} BlSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *bl_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bl_version(void);

struct BlSolverConfig bl_solver_config_default(void);

/**
 * Parse a state description such as `rho3:p=0.4` or `bsc:delta=0.1`.
 *
 * # Safety
 * `spec` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum BlStatus bl_state_from_spec(const char *spec, struct BlState **out);

/**
 * Build a state from a row-major `(d_x·d_y)²` matrix of interleaved
 * `re, im` pairs (`2·(d_x·d_y)²` doubles).
 *
 * # Safety
 * `re_im` must point to that many doubles and `out` must be valid.
 */
enum BlStatus bl_state_from_matrix(const double *re_im,
                                   size_t d_x,
                                   size_t d_y,
                                   struct BlState **out);

/**
 * # Safety
 * `state` must come from a `bl_state_*` constructor or be null.
 */
void bl_state_free(struct BlState *state);

/**
 * `S(X)`, `S(Y)` and `I(X;Y)` in bits. Any output pointer may be null.
 *
 * # Safety
 * `state` must be a live handle.
 */
enum BlStatus bl_state_entropies(const struct BlState *state,
                                 double *s_x,
                                 double *s_y,
                                 double *i_xy);

/**
 * Compute a trade-off curve on the given abscissae (in bits).
 *
 * # Safety
 * `state` and `cfg` must be valid, `grid` must hold `n` doubles and `out`
 * must be writable.
 */
enum BlStatus bl_curve_compute(const struct BlState *state,
                               enum BlCurveKind kind,
                               const struct BlSolverConfig *cfg,
                               const double *grid,
                               size_t n,
                               struct BlCurve **out);

/**
 * # Safety
 * `curve` must be a live handle or null.
 */
size_t bl_curve_len(const struct BlCurve *curve);

/**
 * Read point `i`. Any output pointer may be null.
 *
 * # Safety
 * `curve` must be a live handle.
 */
enum BlStatus bl_curve_point(const struct BlCurve *curve,
                             size_t i,
                             double *abscissa,
                             double *value,
                             double *achieved_constraint,
                             int *converged);

/**
 * Full curve, witnesses included, as a JSON string released with
 * [`bl_string_free`].
 *
 * # Safety
 * `curve` must be a live handle and `out` writable.
 */
enum BlStatus bl_curve_to_json(const struct BlCurve *curve, char **out);

/**
 * # Safety
 * `curve` must come from [`bl_curve_compute`] or be null.
 */
void bl_curve_free(struct BlCurve *curve);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void bl_string_free(char *s);

/**
 * Rate-region boundary `Q_Y(Q_X)` at the given `Q_X` values.
 *
 * # Safety
 * As for [`bl_curve_compute`].
 */
enum BlStatus bl_region_compute(const struct BlState *state,
                                const struct BlSolverConfig *cfg,
                                const double *q_x,
                                size_t n,
                                struct BlRegion **out);

/**
 * # Safety
 * `region` must be a live handle or null.
 */
size_t bl_region_len(const struct BlRegion *region);

/**
 * # Safety
 * `region` must be a live handle.
 */
enum BlStatus bl_region_point(const struct BlRegion *region, size_t i, double *q_x, double *q_y);

/**
 * # Safety
 * `region` must come from [`bl_region_compute`] or be null.
 */
void bl_region_free(struct BlRegion *region);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOTTLENECK_LAB_H */
