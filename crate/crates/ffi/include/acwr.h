#ifndef ACWR_H
#define ACWR_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AcwrBoundKind {
  ACWR_BOUND_KIND_FINITE = 0,
  ACWR_BOUND_KIND_UNBOUNDED = 1,
  ACWR_BOUND_KIND_UNDEFINED = 2,
} AcwrBoundKind;

typedef enum AcwrMethod {
  ACWR_METHOD_ROLLING_COUPLED = 0,
  ACWR_METHOD_ROLLING_UNCOUPLED = 1,
  ACWR_METHOD_EWMA_COUPLED = 2,
  ACWR_METHOD_EWMA_UNCOUPLED = 3,
} AcwrMethod;

typedef enum AcwrStatus {
  ACWR_STATUS_OK = 0,
  ACWR_STATUS_NULL_POINTER = 1,
  ACWR_STATUS_INVALID_ARGUMENT = 2,
  ACWR_STATUS_INSUFFICIENT_HISTORY = 3,
  ACWR_STATUS_OUT_OF_RANGE = 4,
  ACWR_STATUS_BUFFER_TOO_SMALL = 5,
  ACWR_STATUS_PANIC = 6,
} AcwrStatus;

// Opaque daily workload series.
typedef struct AcwrSeries AcwrSeries;

// One ratio. When `defined` is false, `ratio` is 0 and must be ignored.
typedef struct AcwrRatio {
  // Days since the first day of the series.
  size_t day_index;
  double acute;
  double chronic;
  double ratio;
  bool defined;
  bool converged;
} AcwrRatio;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next call into the library from this thread.
const char *acwr_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *acwr_version(void);

// Create a series of `len` daily loads starting at `start_date`
// (`YYYY-MM-DD`). `loads` may be NULL when `len` is 0.
//
// # Safety
// `athlete_id` and `start_date` must be NUL-terminated strings, `loads`
// must point to `len` doubles and `out` must be writable.
enum AcwrStatus acwr_series_new(const char *athlete_id,
                                const char *start_date,
                                const double *loads,
                                size_t len,
                                struct AcwrSeries **out);

// # Safety
// `series` must come from [`acwr_series_new`] and not be used afterwards.
// NULL is ignored.
void acwr_series_free(struct AcwrSeries *series);

// Number of days in the series, 0 for NULL.
//
// # Safety
// `series` must be NULL or a live handle.
size_t acwr_series_len(const struct AcwrSeries *series);

// Ratio on day `day_index` of the series.
//
// # Safety
// `series` must be a live handle and `out` writable.
enum AcwrStatus acwr_ratio_at(const struct AcwrSeries *series,
                              enum AcwrMethod method,
                              size_t day_index,
                              struct AcwrRatio *out);

// Every defined-history ratio of the series. `*written` receives the
// number of points; if it exceeds `capacity`, nothing is copied and
// `BufferTooSmall` is returned. `out` may be NULL when `capacity` is 0.
//
// # Safety
// `series` must be a live handle, `out` must hold `capacity` elements and
// `written` must be writable.
enum AcwrStatus acwr_compute_series(const struct AcwrSeries *series,
                                    enum AcwrMethod method,
                                    struct AcwrRatio *out,
                                    size_t capacity,
                                    size_t *written);

// 2/(n+1).
double acwr_lambda_from_n(uint32_t n);

// Weights of the initial value and the first load after `t` days.
//
// # Safety
// `w0` and `w1` must be writable.
enum AcwrStatus acwr_first_weights(double lambda, size_t t, double *w0, double *w1);

// First day on which two EWMAs started `initial_difference` apart are
// closer than `epsilon`.
//
// # Safety
// `out` must be writable.
enum AcwrStatus acwr_convergence_day(double lambda,
                                     double initial_difference,
                                     double epsilon,
                                     uint64_t *out);

// Largest next-week load keeping the rolling ratio at or below
// `max_ratio`. `*value` is meaningful only when `*kind` is `Finite`.
//
// # Safety
// `prior_weekly_totals` must point to `len` doubles; `kind` and `value`
// must be writable.
enum AcwrStatus acwr_max_safe_acute(const double *prior_weekly_totals,
                                    size_t len,
                                    double max_ratio,
                                    bool uncoupled,
                                    size_t chronic_weeks,
                                    enum AcwrBoundKind *kind,
                                    double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ACWR_H */
