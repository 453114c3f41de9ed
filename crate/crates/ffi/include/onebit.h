#ifndef ONEBIT_H
#define ONEBIT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum OnebitStatus {
  ONEBIT_STATUS_OK = 0,
  ONEBIT_STATUS_NULL_POINTER = 1,
  ONEBIT_STATUS_INVALID_DIMENSION = 2,
  ONEBIT_STATUS_INVALID_PARAMETER = 3,
  ONEBIT_STATUS_DIMENSION_MISMATCH = 4,
  ONEBIT_STATUS_DOMAIN = 5,
  ONEBIT_STATUS_EMPTY_MEASUREMENT = 6,
  ONEBIT_STATUS_DEGENERATE_SOLUTION = 7,
  ONEBIT_STATUS_PARSE = 8,
  ONEBIT_STATUS_IO = 9,
  ONEBIT_STATUS_PANIC = 10,
} OnebitStatus;

typedef enum OnebitShift {
  ONEBIT_SHIFT_GAUSSIAN_DITHER = 0,
  ONEBIT_SHIFT_CONSTANT_THRESHOLD = 1,
  ONEBIT_SHIFT_ZERO = 2,
} OnebitShift;

typedef enum OnebitNormStatus {
  ONEBIT_NORM_STATUS_OK = 0,
  ONEBIT_NORM_STATUS_BELOW_HALF = 1,
  ONEBIT_NORM_STATUS_SATURATED = 2,
} OnebitNormStatus;

typedef enum OnebitRecoveryStatus {
  ONEBIT_RECOVERY_STATUS_OPTIMAL = 0,
  ONEBIT_RECOVERY_STATUS_INFEASIBLE = 1,
  ONEBIT_RECOVERY_STATUS_NUMERICAL_FAILURE = 2,
  ONEBIT_RECOVERY_STATUS_NORM_UNRESOLVED = 3,
} OnebitRecoveryStatus;

/**
 * Opaque measurement ensemble.
 */
typedef struct OnebitEnsemble OnebitEnsemble;

/**
 * Opaque sign vector.
 */
typedef struct OnebitSigns OnebitSigns;

/**
 * Result of the norm estimator. `lambda` is NaN when `status` is `BelowHalf`.
 */
typedef struct OnebitNormEstimate {
  double lambda;
  double f_m;
  enum OnebitNormStatus status;
} OnebitNormEstimate;

/**
 * Summary of an LP recovery. `t_sharp` is NaN for direction-only recovery.
 * `has_estimate` is 1 when the estimate buffer was written.
 */
typedef struct OnebitRecoveryInfo {
  enum OnebitRecoveryStatus status;
  double objective;
  double t_sharp;
  uint64_t iterations;
  int32_t has_estimate;
} OnebitRecoveryInfo;

/**
 * Message describing the last failure on this thread, or an empty string.
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *onebit_last_error(void);

/**
 * Builds an `m x n` Gaussian ensemble with the given shifts. `tau` is
 * ignored for `Zero`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum OnebitStatus onebit_ensemble_new(size_t m,
                                      size_t n,
                                      enum OnebitShift kind,
                                      double tau,
                                      uint64_t seed,
                                      struct OnebitEnsemble **out);

/**
 * Builds an ensemble from a row-major `m x n` matrix and `m` shifts.
 *
 * # Safety
 * `matrix` must point to `m * n` doubles, `shifts` to `m` doubles, and
 * `out` must be valid for a pointer write.
 */
enum OnebitStatus onebit_ensemble_from_parts(size_t m,
                                             size_t n,
                                             const double *matrix,
                                             const double *shifts,
                                             enum OnebitShift kind,
                                             double tau,
                                             struct OnebitEnsemble **out);

/**
 * # Safety
 * `e` must be null or a handle from this library that has not been freed.
 */
void onebit_ensemble_free(struct OnebitEnsemble *e);

/**
 * # Safety
 * `e` must be a live handle; `m` and `n` must be valid for writes.
 */
enum OnebitStatus onebit_ensemble_dims(const struct OnebitEnsemble *e, size_t *m, size_t *n);

/**
 * Copies the row-major matrix into `buf`, which must hold `m * n` doubles.
 *
 * # Safety
 * `e` must be a live handle and `buf` valid for `len` doubles.
 */
enum OnebitStatus onebit_ensemble_matrix(const struct OnebitEnsemble *e, double *buf, size_t len);

/**
 * Copies the `m` shifts into `buf`.
 *
 * # Safety
 * `e` must be a live handle and `buf` valid for `len` doubles.
 */
enum OnebitStatus onebit_ensemble_shifts(const struct OnebitEnsemble *e, double *buf, size_t len);

/**
 * Quantizes `x` (length `n`) against the ensemble.
 *
 * # Safety
 * `e` must be a live handle, `x` valid for `n` doubles, `out` valid for a write.
 */
enum OnebitStatus onebit_ensemble_quantize(const struct OnebitEnsemble *e,
                                           const double *x,
                                           size_t n,
                                           struct OnebitSigns **out);

/**
 * Draws `m` measurements of `x` without storing the matrix. The signs
 * equal those of an ensemble built with the same `m, n, kind, tau, seed`.
 *
 * # Safety
 * `x` must be valid for `n` doubles and `out` for a write.
 */
enum OnebitStatus onebit_quantize_streaming(size_t m,
                                            size_t n,
                                            enum OnebitShift kind,
                                            double tau,
                                            uint64_t seed,
                                            const double *x,
                                            struct OnebitSigns **out);

/**
 * Wraps `len` signs, each `+1` or `-1`.
 *
 * # Safety
 * `bits` must be valid for `len` bytes and `out` for a write.
 */
enum OnebitStatus onebit_signs_new(const int8_t *bits, size_t len, struct OnebitSigns **out);

/**
 * # Safety
 * `s` must be null or a live handle.
 */
void onebit_signs_free(struct OnebitSigns *s);

/**
 * Number of signs, or 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t onebit_signs_len(const struct OnebitSigns *s);

/**
 * # Safety
 * `s` must be a live handle and `buf` valid for `len` bytes.
 */
enum OnebitStatus onebit_signs_copy(const struct OnebitSigns *s, int8_t *buf, size_t len);

/**
 * Norm estimate from signs taken at the constant threshold `tau`.
 *
 * # Safety
 * `s` must be a live handle and `out` valid for a write.
 */
enum OnebitStatus onebit_estimate_norm(const struct OnebitSigns *s,
                                       double tau,
                                       struct OnebitNormEstimate *out);

/**
 * Norm-aware recovery from a `GaussianDither` ensemble. On success with an
 * estimate, `estimate` (length `n`) receives `tau x# / t#`.
 *
 * # Safety
 * `e` and `s` must be live handles, `estimate` valid for `len` doubles and
 * `info` valid for a write.
 */
enum OnebitStatus onebit_recover_augmented(const struct OnebitEnsemble *e,
                                           const struct OnebitSigns *s,
                                           double *estimate,
                                           size_t len,
                                           struct OnebitRecoveryInfo *info);

/**
 * Unit-norm direction recovery from a `Zero`-shift ensemble.
 *
 * # Safety
 * Same as [`onebit_recover_augmented`].
 */
enum OnebitStatus onebit_recover_direction(const struct OnebitEnsemble *e,
                                           const struct OnebitSigns *s,
                                           double *estimate,
                                           size_t len,
                                           struct OnebitRecoveryInfo *info);

double onebit_erf(double x);

double onebit_erfc(double x);

/**
 * # Safety
 * `out` must be valid for a write.
 */
enum OnebitStatus onebit_erfinv(double u, double *out);

/**
 * Measurements for `|Lambda - ||x||| <= delta` with probability `1 - epsilon`
 * for one fixed signal in the annulus `r <= ||x|| <= big_r`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum OnebitStatus onebit_sample_size_fixed_signal(double r,
                                                  double big_r,
                                                  double delta,
                                                  double epsilon,
                                                  uint64_t *out);

/**
 * Measurements for the uniform guarantee over `s`-sparse signals in `R^n`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum OnebitStatus onebit_sample_size_uniform(double r,
                                             double big_r,
                                             double delta,
                                             size_t n,
                                             size_t s,
                                             double c1,
                                             uint64_t *out);

#endif  /* ONEBIT_H */
