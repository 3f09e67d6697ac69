#ifndef LCDIFF_H
#define LCDIFF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define LCDIFF_OK 0

#define LCDIFF_ERR_NULL 1

#define LCDIFF_ERR_DOMAIN 2

#define LCDIFF_ERR_INVALID_GRID 3

#define LCDIFF_ERR_NON_CONVERGENCE 4

#define LCDIFF_ERR_DIVERGENCE 5

#define LCDIFF_ERR_NOT_NORMALIZED 6

#define LCDIFF_ERR_BUFFER 7

#define LCDIFF_ERR_OTHER 8

#define LCDIFF_ERR_PANIC 9

#define LCDIFF_LAW_NORMAL 0

#define LCDIFF_LAW_NORMAL_PRODUCT 1

#define LCDIFF_LAW_LAPLACE 2

#define LCDIFF_GENERATOR_NORMAL_PRODUCT 0

#define LCDIFF_GENERATOR_PRODUCT_SELF_DIFFERENCE 1

#define LCDIFF_MGF_DENSITY_QUADRATURE 0

#define LCDIFF_MGF_GAUSSIAN_CONDITIONING 1

/**
 * Opaque grid density handle.
 */
typedef struct lcdiff_grid lcdiff_grid;

/**
 * Result of a log-concavity check. Witness fields are meaningful only when
 * `has_witness` is 1.
 */
typedef struct {
  int32_t holds;
  int32_t has_witness;
  double x;
  double m;
  double y;
  double violation;
} lcdiff_verdict;

typedef struct {
  uint64_t n;
  double d;
  double scaled;
  double threshold;
  int32_t pass;
} lcdiff_ks_report;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t lcdiff_last_error(char *buf, size_t len);

/**
 * `K₀(x)` for `x > 0`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
int32_t lcdiff_bessel_k0(double x, double *out);

/**
 * `ln K₀(x)` for `x > 0`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
int32_t lcdiff_log_bessel_k0(double x, double *out);

/**
 * `K₀'(x)/K₀(x)` for `x > 0`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
int32_t lcdiff_k_ratio(double x, double *out);

/**
 * Samples a built-in law on the midpoint grid of half-width `half_width`
 * with `n_cells` cells.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
int32_t lcdiff_grid_discretize(uint32_t law_code,
                               double half_width,
                               size_t n_cells,
                               lcdiff_grid **out);

/**
 * Wraps caller-supplied values (copied) as a grid density.
 *
 * # Safety
 * `values` must be null or point to `n_cells` readable doubles; `out` must
 * be null or valid for writes.
 */
int32_t lcdiff_grid_from_values(double half_width,
                                const double *values,
                                size_t n_cells,
                                lcdiff_grid **out);

/**
 * Releases a grid. Null is ignored.
 *
 * # Safety
 * `g` must be null or a handle returned by this library, not yet freed.
 */
void lcdiff_grid_free(lcdiff_grid *g);

/**
 * Number of cells, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t lcdiff_grid_len(const lcdiff_grid *g);

/**
 * Half-width of the grid, or NaN for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
double lcdiff_grid_half_width(const lcdiff_grid *g);

/**
 * Copies the grid values into `out`, which must hold `len` doubles with
 * `len` at least the grid length.
 *
 * # Safety
 * `g` must be null or a live handle; `out` must be null or point to `len`
 * writable doubles.
 */
int32_t lcdiff_grid_values(const lcdiff_grid *g, double *out, size_t len);

/**
 * Density of `X - X'` by FFT; the result has twice the half-width and
 * twice the cells.
 *
 * # Safety
 * `g` must be null or a live handle; `out` must be null or valid for writes.
 */
int32_t lcdiff_grid_self_difference(const lcdiff_grid *g, lcdiff_grid **out);

/**
 * Density of `X - X'` for a built-in law by node-wise quadrature, on the
 * grid `lcdiff_grid_self_difference` would produce.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
int32_t lcdiff_self_difference_quadrature(uint32_t law_code,
                                          double half_width,
                                          size_t n_cells,
                                          double tol,
                                          lcdiff_grid **out);

/**
 * Moment generating function of a built-in law at `t`. The conditioning
 * method exists only for the normal product.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
int32_t lcdiff_mgf(uint32_t law_code, uint32_t method, double t, double tol, double *out);

/**
 * Midpoint log-concavity check of a grid.
 *
 * # Safety
 * `g` must be null or a live handle; `out` must be null or valid for writes.
 */
int32_t lcdiff_check_log_concavity(const lcdiff_grid *g, double tol, lcdiff_verdict *out);

/**
 * Writes draws `start .. start + n` of a generator into `out`.
 *
 * # Safety
 * `out` must be null or point to `n` writable doubles.
 */
int32_t lcdiff_sample(uint32_t generator_code,
                      uint64_t seed,
                      uint64_t start,
                      size_t n,
                      double *out);

/**
 * One-sample KS test of `values` against the standard Laplace CDF.
 *
 * # Safety
 * `values` must be null or point to `n` readable doubles; `out` must be
 * null or valid for writes.
 */
int32_t lcdiff_ks_laplace(const double *values, size_t n, double alpha, lcdiff_ks_report *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LCDIFF_H */
