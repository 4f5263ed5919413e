#ifndef ELLIPTICAL_OU_H
#define ELLIPTICAL_OU_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Bits of `EouFitResult::boundary_flags`.
 */
#define EOU_BOUNDARY_ALPHA 1

#define EOU_BOUNDARY_BETA 2

#define EOU_BOUNDARY_RHO 4

#define EOU_BOUNDARY_PSI 8

#define EOU_BOUNDARY_A2 16

/**
 * Status codes returned by every fallible function.
 */
typedef enum EouStatus {
  EOU_STATUS_OK = 0,
  EOU_STATUS_NULL_POINTER = 1,
  EOU_STATUS_INVALID_ARGUMENT = 2,
  EOU_STATUS_CONSTRAINT_VIOLATED = 3,
  EOU_STATUS_NOT_CONVERGED = 4,
  EOU_STATUS_INTERNAL = 5,
  EOU_STATUS_PANIC = 6,
} EouStatus;

/**
 * Time-stepping schemes for `eou_simulate`.
 */
typedef enum EouScheme {
  EOU_SCHEME_EULER_MARUYAMA = 0,
  EOU_SCHEME_EXACT_TRANSITION = 1,
} EouScheme;

/**
 * Model families for `eou_fit`.
 */
typedef enum EouModel {
  EOU_MODEL_ELLIPTICAL = 0,
  EOU_MODEL_CIRCULAR = 1,
  /**
   * Elliptical with the oscillation frequency held at the supplied `beta`.
   */
  EOU_MODEL_ELLIPTICAL_FIXED_BETA = 2,
} EouModel;

/**
 * Whittle likelihoods for `eou_fit`.
 */
typedef enum EouLikelihood {
  EOU_LIKELIHOOD_FULL = 0,
  EOU_LIKELIHOOD_MARGINAL = 1,
} EouLikelihood;

/**
 * Opaque regularly sampled complex series.
 */
typedef struct EouSeries EouSeries;

/**
 * Opaque discrete Fourier transforms of a series.
 */
typedef struct EouSpectralData EouSpectralData;

/**
 * Coefficients of the complex SDE. `r_re`, `r_im` hold the noise pseudo-variance.
 */
typedef struct EouEllipticalParams {
  double alpha1;
  double beta1;
  double alpha2;
  double beta2;
  double sigma2;
  double r_re;
  double r_im;
} EouEllipticalParams;

/**
 * Geometric parameters: damping, frequency, stretch, orientation, noise amplitude.
 */
typedef struct EouGeometricParams {
  double alpha;
  double beta;
  double rho;
  double psi;
  double a2;
} EouGeometricParams;

/**
 * Spectral matrix entries at one frequency.
 */
typedef struct EouSpectralValue {
  double s_pos;
  double s_neg;
  double r_re;
  double r_im;
  double det;
} EouSpectralValue;

typedef struct EouFitResult {
  struct EouGeometricParams geometric;
  struct EouEllipticalParams elliptical;
  double psi_hat;
  double loglik;
  double eccentricity;
  /**
   * 1 when the optimizer converged, 0 otherwise.
   */
  int32_t converged;
  size_t n_freqs_used;
  uint32_t boundary_flags;
  size_t iterations;
} EouFitResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL if none. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *eou_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *eou_version(void);

/**
 * Fills `out` with the coefficients `(alpha1, beta1, alpha2, beta2, sigma2)` and the
 * pseudo-variance they imply.
 *
 * # Safety
 * `out` must be NULL or point to writable memory for one `EouEllipticalParams`.
 */
enum EouStatus eou_elliptical_new(double alpha1,
                                  double beta1,
                                  double alpha2,
                                  double beta2,
                                  double sigma2,
                                  struct EouEllipticalParams *out);

/**
 * # Safety
 * `params` must be NULL or valid for reads; `out` NULL or valid for writes.
 */
enum EouStatus eou_to_geometric(const struct EouEllipticalParams *params,
                                struct EouGeometricParams *out);

/**
 * # Safety
 * `params` must be NULL or valid for reads; `out` NULL or valid for writes.
 */
enum EouStatus eou_to_elliptical(const struct EouGeometricParams *params,
                                 struct EouEllipticalParams *out);

/**
 * Spectral matrix at `omega` for sampling interval `delta`, folding `k_max` aliases per side.
 *
 * # Safety
 * `params` must be NULL or valid for reads; `out` NULL or valid for writes.
 */
enum EouStatus eou_spectral_matrix(const struct EouGeometricParams *params,
                                   double omega,
                                   double delta,
                                   size_t k_max,
                                   struct EouSpectralValue *out);

/**
 * Copies `n` samples from `x` and `y` into a new series handle.
 *
 * # Safety
 * `x` and `y` must each point to `n` readable doubles; `out` must be NULL or writable.
 */
enum EouStatus eou_series_new(const double *x,
                              const double *y,
                              size_t n,
                              double delta,
                              double t0,
                              struct EouSeries **out);

/**
 * Simulates `n` samples at spacing `delta`. `scheme` takes an `EouScheme` value.
 *
 * # Safety
 * `params` must be NULL or valid for reads; `out` NULL or valid for writes.
 */
enum EouStatus eou_simulate(const struct EouEllipticalParams *params,
                            size_t n,
                            double delta,
                            uint64_t seed,
                            uint64_t replicate,
                            uint32_t scheme,
                            struct EouSeries **out);

/**
 * Number of samples in `series`, or 0 for NULL.
 *
 * # Safety
 * `series` must be NULL or a live handle.
 */
size_t eou_series_len(const struct EouSeries *series);

/**
 * Copies the samples into `x` and `y`, which must hold `capacity` doubles each.
 *
 * # Safety
 * `series` must be NULL or a live handle; `x`, `y` writable for `capacity` doubles.
 */
enum EouStatus eou_series_copy(const struct EouSeries *series,
                               double *x,
                               double *y,
                               size_t capacity);

/**
 * # Safety
 * `series` must be NULL or a handle not yet freed.
 */
void eou_series_free(struct EouSeries *series);

/**
 * Transforms `series` on its Fourier grid with one-based phase. A non-zero `mean_subtract`
 * removes the sample mean first.
 *
 * # Safety
 * `series` must be NULL or a live handle; `out` NULL or writable.
 */
enum EouStatus eou_dft(const struct EouSeries *series,
                       int32_t mean_subtract,
                       struct EouSpectralData **out);

/**
 * Number of Fourier frequencies, or 0 for NULL.
 *
 * # Safety
 * `data` must be NULL or a live handle.
 */
size_t eou_spectral_len(const struct EouSpectralData *data);

/**
 * Copies the ascending frequency grid and the periodogram, `capacity` doubles each.
 *
 * # Safety
 * `data` must be NULL or a live handle; `omega`, `periodogram` writable for `capacity` doubles.
 */
enum EouStatus eou_spectral_copy(const struct EouSpectralData *data,
                                 double *omega,
                                 double *periodogram,
                                 size_t capacity);

/**
 * # Safety
 * `data` must be NULL or a handle not yet freed.
 */
void eou_spectral_free(struct EouSpectralData *data);

/**
 * Whittle fit. `model` and `likelihood` take `EouModel` and `EouLikelihood` values; `beta` is
 * used only by the fixed-frequency model. `bands` holds `n_bands` (lo, hi) pairs in radians per
 * unit time; `n_bands = 0` uses every frequency. Returns `NOT_CONVERGED` with `out` filled
 * when the optimizer stops short.
 *
 * # Safety
 * `data` must be NULL or a live handle; `bands` readable for `2 * n_bands` doubles; `out`
 * NULL or writable.
 */
enum EouStatus eou_fit(const struct EouSpectralData *data,
                       uint32_t model,
                       double beta,
                       uint32_t likelihood,
                       const double *bands,
                       size_t n_bands,
                       size_t k_max,
                       struct EouFitResult *out);

/**
 * Non-parametric orientation from the transforms at the grid frequencies nearest `+-omega`.
 *
 * # Safety
 * `data` must be NULL or a live handle; `out` NULL or writable.
 */
enum EouStatus eou_estimate_orientation(const struct EouSpectralData *data,
                                        double omega,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ELLIPTICAL_OU_H */
