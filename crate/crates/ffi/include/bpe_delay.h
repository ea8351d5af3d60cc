#ifndef BPE_DELAY_H
#define BPE_DELAY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BpdStatus {
  BPD_STATUS_OK = 0,
  BPD_STATUS_NULL_POINTER = 1,
  BPD_STATUS_INVALID_ARGUMENT = 2,
  BPD_STATUS_DIMENSION_MISMATCH = 3,
  BPD_STATUS_NOT_POSITIVE_DEFINITE = 4,
  BPD_STATUS_CONFIG = 5,
  BPD_STATUS_IO = 6,
  BPD_STATUS_BUFFER_TOO_SMALL = 7,
  BPD_STATUS_PANIC = 8,
} BpdStatus;

typedef enum BpdKernelFamily {
  BPD_KERNEL_FAMILY_SQUARED_EXPONENTIAL = 0,
  BPD_KERNEL_FAMILY_MATERN = 1,
  BPD_KERNEL_FAMILY_LINEAR = 2,
} BpdKernelFamily;

/**
 * Opaque experiment configuration.
 */
typedef struct BpdConfig BpdConfig;

/**
 * Opaque kernel handle.
 */
typedef struct BpdKernel BpdKernel;

/**
 * Opaque fitted posterior.
 */
typedef struct BpdPredictor BpdPredictor;

/**
 * Opaque results of a finished experiment suite.
 */
typedef struct BpdResults BpdResults;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *bpd_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bpd_version(void);

/**
 * `family` is a `BpdKernelFamily` value; `nu` is read only for the Matérn
 * family (0.5, 1.5 or 2.5).
 */
enum BpdStatus bpd_kernel_new(int32_t family,
                              double nu,
                              double lengthscale,
                              double output_scale,
                              size_t dim,
                              struct BpdKernel **out);

void bpd_kernel_free(struct BpdKernel *kernel);

enum BpdStatus bpd_kernel_eval(const struct BpdKernel *kernel,
                               const double *x,
                               const double *y,
                               double *out);

/**
 * Fits the posterior on `n` points with observations `values`.
 */
enum BpdStatus bpd_predictor_fit(const struct BpdKernel *kernel,
                                 double lambda,
                                 const double *points,
                                 const double *values,
                                 size_t n,
                                 struct BpdPredictor **out);

void bpd_predictor_free(struct BpdPredictor *predictor);

/**
 * Posterior mean and standard deviation at one point.
 */
enum BpdStatus bpd_predictor_predict(const struct BpdPredictor *predictor,
                                     const double *x,
                                     double *mean,
                                     double *std_dev);

/**
 * Writes the round schedule into `q` and `t` (capacity `cap` each) and the
 * round count into `rounds`. With too small a buffer nothing is written
 * except `rounds`, and `BPD_STATUS_BUFFER_TOO_SMALL` is returned.
 */
enum BpdStatus bpd_schedule(uint64_t horizon,
                            double u,
                            uint64_t *q,
                            uint64_t *t,
                            size_t cap,
                            size_t *rounds);

/**
 * Delay deviation bound ψ_t(δ) for sub-exponential parameters `(xi, b)`.
 */
enum BpdStatus bpd_psi(uint64_t t, double delta, double xi, double b, double *out);

/**
 * Round padding `E[τ] + ψ_T(δ/2)`.
 */
enum BpdStatus bpd_u_t(uint64_t horizon,
                       double delta,
                       double xi,
                       double b,
                       double mean_delay,
                       double *out);

/**
 * Confidence width `C_k + (σ/λ)·sqrt(2 ln(1/δ))`.
 */
enum BpdStatus bpd_beta(double c_k, double sigma, double lambda, double delta, double *out);

/**
 * Parses a TOML experiment config.
 */
enum BpdStatus bpd_config_from_toml(const char *text, struct BpdConfig **out);

enum BpdStatus bpd_config_load(const char *path, struct BpdConfig **out);

void bpd_config_free(struct BpdConfig *config);

/**
 * Runs every algorithm and trial of the config.
 */
enum BpdStatus bpd_run(const struct BpdConfig *config, struct BpdResults **out);

void bpd_results_free(struct BpdResults *results);

/**
 * Number of aggregated curves (one per distinct algorithm).
 */
enum BpdStatus bpd_results_curve_count(const struct BpdResults *results, size_t *out);

/**
 * Algorithm name of curve `index` as a static NUL-terminated string.
 */
enum BpdStatus bpd_results_algorithm(const struct BpdResults *results,
                                     size_t index,
                                     const char **out);

/**
 * Copies the mean cumulative-regret curve of `index` into `buf` (capacity
 * `cap`) and its length into `len`.
 */
enum BpdStatus bpd_results_mean_curve(const struct BpdResults *results,
                                      size_t index,
                                      double *buf,
                                      size_t cap,
                                      size_t *len);

/**
 * Writes traces.csv, summary.csv and rounds.csv into `dir`.
 */
enum BpdStatus bpd_results_write_csv(const struct BpdResults *results, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BPE_DELAY_H */
