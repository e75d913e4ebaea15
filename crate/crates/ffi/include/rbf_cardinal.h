#ifndef RBF_CARDINAL_H
#define RBF_CARDINAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum RbfcStatus {
  RBFC_STATUS_OK = 0,
  RBFC_STATUS_NULL_POINTER = 1,
  RBFC_STATUS_DOMAIN = 2,
  RBFC_STATUS_UNSUPPORTED = 3,
  RBFC_STATUS_NUMERICAL = 4,
  RBFC_STATUS_BANDWIDTH = 5,
  RBFC_STATUS_OUT_OF_RANGE = 6,
  RBFC_STATUS_GRID_MISMATCH = 7,
  RBFC_STATUS_COVERAGE = 8,
  RBFC_STATUS_ILL_CONDITIONED = 9,
  RBFC_STATUS_INVALID_SAMPLES = 10,
  RBFC_STATUS_IO = 11,
  RBFC_STATUS_PARSE = 12,
  RBFC_STATUS_PANIC = 13,
  RBFC_STATUS_OTHER = 14,
} RbfcStatus;

/**
 * Interpolant on scattered nodes.
 */
typedef struct RbfcGram RbfcGram;

/**
 * A kernel: multiquadric, Poisson or Gaussian.
 */
typedef struct RbfcKernel RbfcKernel;

/**
 * A sampled cardinal function.
 */
typedef struct RbfcTable RbfcTable;

/**
 * Interpolant on the lattice j/N, |j| ≤ N.
 */
typedef struct RbfcUniform RbfcUniform;

/**
 * Truncation plan; `gamma` and `d_lower` are NaN when not defined.
 */
typedef struct RbfcTruncation {
  size_t tau;
  size_t terms;
  double gamma;
  double d_lower;
} RbfcTruncation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`) and returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t rbfc_last_error(char *buf, size_t len);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum RbfcStatus rbfc_kernel_multiquadric(double alpha, double c, struct RbfcKernel **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum RbfcStatus rbfc_kernel_poisson(double c, struct RbfcKernel **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum RbfcStatus rbfc_kernel_gaussian(double lambda, struct RbfcKernel **out);

/**
 * # Safety
 * `kernel` must come from an `rbfc_kernel_*` constructor and not be used afterwards.
 */
void rbfc_kernel_free(struct RbfcKernel *kernel);

/**
 * φ(x).
 *
 * # Safety
 * Pointers must be valid.
 */
enum RbfcStatus rbfc_kernel_spatial(const struct RbfcKernel *kernel, double x, double *out);

/**
 * φ̂(ξ).
 *
 * # Safety
 * Pointers must be valid.
 */
enum RbfcStatus rbfc_kernel_fourier(const struct RbfcKernel *kernel, double xi, double *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum RbfcStatus rbfc_compute_tau(const struct RbfcKernel *kernel,
                                 double epsilon,
                                 struct RbfcTruncation *out);

/**
 * Builds the cardinal table of `kernel` on [−n, n] with `m` points per unit.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RbfcStatus rbfc_table_build(const struct RbfcKernel *kernel,
                                 double epsilon,
                                 size_t n,
                                 size_t m,
                                 struct RbfcTable **out);

/**
 * # Safety
 * `file` must be a NUL-terminated path and `out` a valid pointer.
 */
enum RbfcStatus rbfc_table_load(const char *file, struct RbfcTable **out);

/**
 * # Safety
 * `table` must be valid and `file` NUL-terminated.
 */
enum RbfcStatus rbfc_table_save(const struct RbfcTable *table, const char *file);

/**
 * L(x) for |x| within the table half-width.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RbfcStatus rbfc_table_eval(const struct RbfcTable *table, double x, double *out);

/**
 * max_j |L(j) − δ_{0j}| over the table.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RbfcStatus rbfc_table_delta_residual(const struct RbfcTable *table, double *out);

/**
 * # Safety
 * `table` must come from `rbfc_table_build` or `rbfc_table_load` and not be used afterwards.
 */
void rbfc_table_free(struct RbfcTable *table);

/**
 * Fits the cardinal interpolant to samples at j/N, |j| ≤ N. The table must be
 * built for the kernel dilated by N; the interpolant keeps its own reference.
 *
 * # Safety
 * `nodes` and `values` must hold `len` values; other pointers must be valid.
 */
enum RbfcStatus rbfc_uniform_fit(const struct RbfcKernel *kernel,
                                 const struct RbfcTable *table,
                                 const double *nodes,
                                 const double *values,
                                 size_t len,
                                 struct RbfcUniform **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum RbfcStatus rbfc_uniform_eval(const struct RbfcUniform *interp, double x, double *out);

/**
 * # Safety
 * `interp` must come from `rbfc_uniform_fit` and not be used afterwards.
 */
void rbfc_uniform_free(struct RbfcUniform *interp);

/**
 * Solves the Gram system for scattered, strictly increasing nodes.
 *
 * # Safety
 * `nodes` and `values` must hold `len` values; other pointers must be valid.
 */
enum RbfcStatus rbfc_gram_fit(const struct RbfcKernel *kernel,
                              const double *nodes,
                              const double *values,
                              size_t len,
                              struct RbfcGram **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum RbfcStatus rbfc_gram_eval(const struct RbfcGram *interp, double x, double *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum RbfcStatus rbfc_gram_condition(const struct RbfcGram *interp, double *out);

/**
 * # Safety
 * `interp` must come from `rbfc_gram_fit` and not be used afterwards.
 */
void rbfc_gram_free(struct RbfcGram *interp);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RBF_CARDINAL_H */
