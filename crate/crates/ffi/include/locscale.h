#ifndef LOCSCALE_H
#define LOCSCALE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LsStatus {
  LS_STATUS_OK = 0,
  LS_STATUS_NULL_POINTER = 1,
  LS_STATUS_INPUT_FORMAT = 2,
  LS_STATUS_CONTRACT = 3,
  LS_STATUS_DOMAIN = 4,
  LS_STATUS_PANIC = 5,
  LS_STATUS_BUFFER_TOO_SMALL = 6,
} LsStatus;

typedef enum LsBoundary {
  LS_BOUNDARY_PERIODIC = 0,
  LS_BOUNDARY_ZERO_PAD = 1,
  LS_BOUNDARY_CLAMP = 2,
} LsBoundary;

typedef enum LsBetaP {
  LS_BETA_P_ONE = 1,
  LS_BETA_P_TWO = 2,
  LS_BETA_P_INF = 0,
} LsBetaP;

typedef enum LsBetaNorm {
  LS_BETA_NORM_MASS = 0,
  LS_BETA_NORM_RADIUS = 1,
} LsBetaNorm;

// Sampled function on a uniform 1-D or 2-D lattice.
typedef struct LsField LsField;

// Weighted point set in `ℝⁿ` carrying a `d`-dimensional quadrature.
typedef struct LsMeasure LsMeasure;

// Transform values and `τ`-derivatives, one row per evaluation point.
typedef struct LsStack LsStack;

// Log-spaced scale grid `t = a^τ`, `τ` from `tau_min` to `tau_max` in
// `steps` points.
typedef struct LsGrid {
  double a;
  double tau_min;
  double tau_max;
  size_t steps;
} LsGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `cap`) and returns its full length in bytes.
// Returns 0 when the last call succeeded.
//
// # Safety
// `buf` must be null or valid for `cap` bytes.
size_t ls_last_error(char *buf, size_t cap);

// `K_t` in intrinsic dimension `d` at squared distance `r2`.
//
// # Safety
// `out` must be valid for one write.
enum LsStatus ls_heat_kernel(size_t d, double r2, double t, double *out);

// `∂_τ^j ψ_t` for grid base `a`.
//
// # Safety
// `out` must be valid for one write.
enum LsStatus ls_wavelet(size_t d, double a, size_t j, double r2, double t, double *out);

// New 1-D field with spacing `h`.
//
// # Safety
// `values` must be valid for `len` reads and `out` for one write.
enum LsStatus ls_field_new_1d(const double *values,
                              size_t len,
                              double h,
                              enum LsBoundary boundary,
                              struct LsField **out);

// New 2-D field, row-major with `nx` columns and `ny` rows.
//
// # Safety
// `values` must be valid for `nx*ny` reads and `out` for one write.
enum LsStatus ls_field_new_2d(const double *values,
                              size_t nx,
                              size_t ny,
                              double h,
                              enum LsBoundary boundary,
                              struct LsField **out);

// # Safety
// `field` must be null or a handle from `ls_field_new_*` not yet freed.
void ls_field_free(struct LsField *field);

// Scale transform of a field with `τ`-derivatives up to 2.
//
// # Safety
// `field` must be a live handle and `out` valid for one write.
enum LsStatus ls_field_scale_stack(const struct LsField *field,
                                   struct LsGrid grid,
                                   double eps_trunc,
                                   struct LsStack **out);

// Measure from `count` points in `ℝⁿ` (row-major) with positive weights.
//
// # Safety
// `points` must be valid for `count*n` reads, `weights` for `count`.
enum LsStatus ls_measure_new(size_t d,
                             size_t n,
                             const double *points,
                             const double *weights,
                             size_t count,
                             struct LsMeasure **out);

// # Safety
// `measure` must be null or a handle from `ls_measure_new` not yet freed.
void ls_measure_free(struct LsMeasure *measure);

// Scale transform of a measure at the listed point indices.
//
// # Safety
// `measure` must be a live handle, `eval` valid for `n_eval` reads.
enum LsStatus ls_measure_scale_stack(const struct LsMeasure *measure,
                                     const size_t *eval,
                                     size_t n_eval,
                                     struct LsGrid grid,
                                     double eps_trunc,
                                     struct LsStack **out);

// # Safety
// `stack` must be null or a handle from an `ls_*_scale_stack` call.
void ls_stack_free(struct LsStack *stack);

// Row count (points) and column count (scales).
//
// # Safety
// `stack` must be a live handle; `rows`, `cols` valid for one write.
enum LsStatus ls_stack_shape(const struct LsStack *stack, size_t *rows, size_t *cols);

// Copies `∂_τ^j S` (j = 0 for `S`) row-major into `buf`.
//
// # Safety
// `stack` must be a live handle and `buf` valid for `cap` writes.
enum LsStatus ls_stack_values(const struct LsStack *stack, size_t j, double *buf, size_t cap);

// Local scales (`τ` values) of one row that are `beta`-visible and
// `delta`-separated. `count` receives the total; at most `cap` are written.
//
// # Safety
// `stack` must be a live handle, `taus` valid for `cap` writes.
enum LsStatus ls_stack_local_scales(const struct LsStack *stack,
                                    size_t row,
                                    double beta,
                                    double delta,
                                    double *taus,
                                    size_t cap,
                                    size_t *count);

// `β_p(x, t)` of a measure against `d`-planes. Writes NaN when the ball
// holds too few points.
//
// # Safety
// `measure` must be a live handle, `x` valid for `n` reads.
enum LsStatus ls_beta_p(const struct LsMeasure *measure,
                        const double *x,
                        double t,
                        enum LsBetaP p,
                        size_t d,
                        enum LsBetaNorm norm,
                        double *out);

// `β(Q)` of a planar point set for the dyadic square
// `[j, j+1)×[k, k+1)·2^{-level}`.
//
// # Safety
// `points` must be valid for `2*count` reads.
enum LsStatus ls_dyadic_beta(const double *points,
                             size_t count,
                             int32_t level,
                             int64_t j,
                             int64_t k,
                             double *out);

// `Σ β(Q)²·l(Q)` over levels `level_min..=level_max`.
//
// # Safety
// `points` must be valid for `2*count` reads.
enum LsStatus ls_tsp_sum(const double *points,
                         size_t count,
                         int32_t level_min,
                         int32_t level_max,
                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOCSCALE_H */
