#ifndef TVD_H
#define TVD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TvdStatus {
  TVD_STATUS_OK = 0,
  TVD_STATUS_ARGUMENT = 1,
  TVD_STATUS_SHAPE = 2,
  /**
   * The solver stopped early. When a best iterate exists it is still
   * returned through the output handle.
   */
  TVD_STATUS_CONVERGENCE = 3,
  TVD_STATUS_IO = 4,
  TVD_STATUS_CSV = 5,
  TVD_STATUS_JSON = 6,
  TVD_STATUS_NULL_POINTER = 7,
  TVD_STATUS_PANIC = 8,
} TvdStatus;

typedef enum TvdSignal {
  TVD_SIGNAL_TWO = 0,
  TVD_SIGNAL_FOUR = 1,
  TVD_SIGNAL_WORST = 2,
} TvdSignal;

/**
 * Opaque row-major matrix of doubles.
 */
typedef struct TvdMatrix TvdMatrix;

typedef struct TvdSolverConfig {
  size_t max_iters;
  double rel_tol;
  double bisect_tol;
  size_t max_bisect;
} TvdSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a
 * successful one. The pointer stays valid until the next call on this
 * thread.
 */
const char *tvd_last_error_message(void);

struct TvdSolverConfig tvd_solver_config_default(void);

/**
 * Copies `rows*cols` row-major values from `data` into a new matrix.
 *
 * # Safety
 * `data` must point to `rows*cols` readable doubles and `out` must be a
 * valid pointer.
 */
enum TvdStatus tvd_matrix_new(size_t rows, size_t cols, const double *data, struct TvdMatrix **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `m` must be null or a handle from this library not yet freed.
 */
void tvd_matrix_free(struct TvdMatrix *m);

/**
 * Row count, or 0 for null.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t tvd_matrix_rows(const struct TvdMatrix *m);

/**
 * Column count, or 0 for null.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t tvd_matrix_cols(const struct TvdMatrix *m);

/**
 * Copies the row-major values into `buf`, which must hold exactly
 * `rows*cols` doubles.
 *
 * # Safety
 * `m` must be a live handle and `buf` must point to `len` writable doubles.
 */
enum TvdStatus tvd_matrix_copy_data(const struct TvdMatrix *m, double *buf, size_t len);

/**
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid pointer.
 */
enum TvdStatus tvd_matrix_read_csv(const char *path, struct TvdMatrix **out);

/**
 * # Safety
 * `m` must be a live handle and `path` a nul-terminated string.
 */
enum TvdStatus tvd_matrix_write_csv(const struct TvdMatrix *m, const char *path);

/**
 * Sum of absolute differences over all grid edges.
 *
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
enum TvdStatus tvd_tv(const struct TvdMatrix *m, double *out);

/**
 * Synthetic `n×n` signal.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TvdStatus tvd_make_signal(enum TvdSignal kind, size_t n, struct TvdMatrix **out);

/**
 * Minimizer of `‖y − θ‖² + lambda·tv(θ)`. A null `cfg` uses the defaults.
 *
 * # Safety
 * `y` must be a live handle, `cfg` null or valid, `out` a valid pointer.
 */
enum TvdStatus tvd_denoise_penalized(const struct TvdMatrix *y,
                                     double lambda,
                                     const struct TvdSolverConfig *cfg,
                                     struct TvdMatrix **out);

/**
 * Euclidean projection of `y` onto `{θ : tv(θ) ≤ budget}`.
 *
 * # Safety
 * `y` must be a live handle, `cfg` null or valid, `out` a valid pointer.
 */
enum TvdStatus tvd_project_tv_ball(const struct TvdMatrix *y,
                                   double budget,
                                   const struct TvdSolverConfig *cfg,
                                   struct TvdMatrix **out);

/**
 * Noise-level estimate used by the tuning-free estimator.
 *
 * # Safety
 * `y` must be a live handle and `out` a valid pointer.
 */
enum TvdStatus tvd_sigma_hat(const struct TvdMatrix *y, double *out);

/**
 * Tuning-free estimate for a square `y`. `sigma_hat` may be null.
 *
 * # Safety
 * `y` must be a live handle, `cfg` and `sigma_hat` null or valid, `out` a
 * valid pointer.
 */
enum TvdStatus tvd_denoise_notuning(const struct TvdMatrix *y,
                                    const struct TvdSolverConfig *cfg,
                                    struct TvdMatrix **out,
                                    double *sigma_hat);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TVD_H */
