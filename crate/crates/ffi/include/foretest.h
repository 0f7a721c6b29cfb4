#ifndef FORETEST_H
#define FORETEST_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FtStatus {
  FT_STATUS_OK = 0,
  FT_STATUS_NULL_POINTER = 1,
  FT_STATUS_INVALID_ARGUMENT = 2,
  FT_STATUS_DOMAIN = 3,
  FT_STATUS_LENGTH = 4,
  FT_STATUS_SINGULAR = 5,
  FT_STATUS_METRIC_UNDEFINED = 6,
  FT_STATUS_SCHEMA = 7,
  FT_STATUS_BUFFER_TOO_SMALL = 8,
  FT_STATUS_PANIC = 9,
  FT_STATUS_OTHER = 10,
} FtStatus;

typedef enum FtAdfRegression {
  FT_ADF_REGRESSION_NO_CONSTANT = 0,
  FT_ADF_REGRESSION_CONSTANT = 1,
  FT_ADF_REGRESSION_CONSTANT_TREND = 2,
} FtAdfRegression;

typedef enum FtMetric {
  /**
   * On a cumulative curve.
   */
  FT_METRIC_CAGR = 0,
  /**
   * On a cumulative curve.
   */
  FT_METRIC_MAX_DRAWDOWN = 1,
  /**
   * On daily returns.
   */
  FT_METRIC_SHARPE = 2,
} FtMetric;

/**
 * Opaque date-indexed frame.
 */
typedef struct FtFrame FtFrame;

typedef struct FtTransferErrors {
  double untrained_zs;
  double pretrained_zs;
  double untrained_ft_full;
  double pretrained_ft_full;
  double untrained_ft_limited;
  double pretrained_ft_limited;
} FtTransferErrors;

typedef struct FtTransferGains {
  double delta_zs;
  double delta_ft_full;
  double delta_ft_limited;
  bool transfers_zs;
  bool transfers_ft_full;
  bool transfers_ft_limited;
} FtTransferGains;

typedef struct FtAdfResult {
  double statistic;
  size_t lags;
  size_t nobs;
  /**
   * 1%, 5% and 10% critical values.
   */
  double critical_values[3];
  bool reject_5pct;
} FtAdfResult;

typedef struct FtCointResult {
  double beta;
  double intercept;
  double statistic;
  size_t lags;
  double critical_values[3];
  bool cointegrated_5pct;
} FtCointResult;

typedef struct FtEcmModel {
  double phi;
  double alpha;
  double intercept;
  /**
   * NaN unless `0 < phi < 1`.
   */
  double half_life;
} FtEcmModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length of the last error message on this thread, excluding the NUL.
 * Zero when the last call succeeded.
 */
size_t ft_last_error_length(void);

/**
 * Copies the last error message (NUL-terminated, truncated to `len`) into
 * `buf`. Returns the number of bytes written, excluding the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t ft_last_error_message(char *buf, size_t len);

/**
 * Static version string.
 */
const char *ft_version(void);

/**
 * Relative error reduction `(untrained − pretrained) / untrained` and its
 * verdict `delta > threshold`.
 *
 * # Safety
 * Out-pointers must be valid for one write.
 */
enum FtStatus ft_transfer_gain(double untrained,
                               double pretrained,
                               double threshold,
                               double *out_delta,
                               bool *out_transfers);

/**
 * The three transfer gains from the six regime errors.
 *
 * # Safety
 * `errors` must be readable and `out` writable.
 */
enum FtStatus ft_transfer_gains(const struct FtTransferErrors *errors,
                                double threshold,
                                struct FtTransferGains *out);

/**
 * Augmented Dickey–Fuller test. `max_lag < 0` selects the Schwert maximum.
 *
 * # Safety
 * `x` must hold `n` values and `out` must be writable.
 */
enum FtStatus ft_adf(const double *x,
                     size_t n,
                     enum FtAdfRegression regression,
                     int64_t max_lag,
                     struct FtAdfResult *out);

/**
 * Engle–Granger test of `y = a + βx + z`.
 *
 * # Safety
 * `x` and `y` must hold `n` values and `out` must be writable.
 */
enum FtStatus ft_engle_granger(const double *x,
                               const double *y,
                               size_t n,
                               struct FtCointResult *out);

/**
 * Error-correction (AR(1)) fit of a spread.
 *
 * # Safety
 * `spread` must hold `n` values and `out` must be writable.
 */
enum FtStatus ft_ecm_fit(const double *spread, size_t n, bool intercept, struct FtEcmModel *out);

/**
 * Per-bar Garman–Klass variance into `out[0..n]`.
 *
 * # Safety
 * All four inputs and `out` must hold `n` values.
 */
enum FtStatus ft_garman_klass_variance(const double *open,
                                       const double *high,
                                       const double *low,
                                       const double *close,
                                       size_t n,
                                       double *out);

/**
 * Cumulative percentage-change targets, row-major `(n − h) × h`:
 * `out[t·h + k − 1] = levels[t+k] / levels[t] − 1` up to rounding.
 *
 * # Safety
 * `levels` must hold `n` values and `out` `out_len` values.
 */
enum FtStatus ft_cumulative_pct_change(const double *levels,
                                       size_t n,
                                       size_t horizon,
                                       double *out,
                                       size_t out_len);

/**
 * One performance metric of `x`. Zero-variance Sharpe ratios return
 * `MetricUndefined`.
 *
 * # Safety
 * `x` must hold `n` values and `out` must be writable.
 */
enum FtStatus ft_metric(enum FtMetric metric, const double *x, size_t n, double *out);

/**
 * Information ratio of `strategy` against `benchmark` daily returns.
 *
 * # Safety
 * Both inputs must hold `n` values and `out` must be writable.
 */
enum FtStatus ft_information_ratio(const double *strategy,
                                   const double *benchmark,
                                   size_t n,
                                   double *out);

/**
 * Reads a CSV with a leading `date` column.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum FtStatus ft_frame_read_csv(const char *path, struct FtFrame **out);

/**
 * Number of rows, or 0 for a null handle.
 *
 * # Safety
 * `frame` must be null or a live handle.
 */
size_t ft_frame_rows(const struct FtFrame *frame);

/**
 * Number of value columns, or 0 for a null handle.
 *
 * # Safety
 * `frame` must be null or a live handle.
 */
size_t ft_frame_columns(const struct FtFrame *frame);

/**
 * Copies column `name` into `out` (missing cells are NaN).
 *
 * # Safety
 * `frame` must be a live handle, `name` NUL-terminated, `out` valid for `len` values.
 */
enum FtStatus ft_frame_column(const struct FtFrame *frame,
                              const char *name,
                              double *out,
                              size_t len);

/**
 * Releases a frame. Null is ignored.
 *
 * # Safety
 * `frame` must be null or a handle not yet freed.
 */
void ft_frame_free(struct FtFrame *frame);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FORETEST_H */
