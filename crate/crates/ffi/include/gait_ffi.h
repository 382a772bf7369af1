#ifndef GAIT_FFI_H
#define GAIT_FFI_H

/* Generated by cbindgen; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Body side.
typedef enum GaitLeg {
  GAIT_LEG_LEFT = 0,
  GAIT_LEG_RIGHT = 1,
} GaitLeg;

// Outcome of every call.
typedef enum GaitStatus {
  GAIT_STATUS_OK = 0,
  // A required pointer argument was null.
  GAIT_STATUS_NULL_POINTER = 1,
  // An argument is out of range or not valid UTF-8.
  GAIT_STATUS_INVALID_ARGUMENT = 2,
  // The recording could not be parsed or repaired.
  GAIT_STATUS_RECORDING = 3,
  // No gait cycle could be segmented.
  GAIT_STATUS_SEGMENTATION = 4,
  // Index computation failed.
  GAIT_STATUS_KINEMATICS = 5,
  // DTW input was rejected.
  GAIT_STATUS_DTW = 6,
  // A statistic is undefined for the input.
  GAIT_STATUS_STATS = 7,
  // The library panicked; the message holds the payload.
  GAIT_STATUS_PANIC = 99,
} GaitStatus;

// DTW distance with its warping path.
typedef struct GaitDtwResult GaitDtwResult;

// Parsed skeletal recording of one trial.
typedef struct GaitTrial GaitTrial;

// Gait events of one leg, in seconds and frame indices.
typedef struct GaitEvents {
  double t_hs;
  double t_to;
  double t_ts;
  size_t hs_frame;
  size_t to_frame;
  size_t ts_frame;
} GaitEvents;

// Per-trial indices. `w` is NaN when the cycle has no double support.
typedef struct GaitIndices {
  double v_n;
  double l_n;
  double s;
  double w;
  double rom_hip;
  double rom_knee;
} GaitIndices;

typedef struct GaitCorrelation {
  double r;
  double ci_low;
  double ci_high;
  size_t n;
} GaitCorrelation;

typedef struct GaitTTest {
  double t;
  double df;
  double p;
  size_t n;
} GaitTTest;

typedef struct GaitIcc {
  double icc;
  double ci_low;
  double ci_high;
} GaitIcc;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a success.
// The pointer stays valid until the next call into the library on the same
// thread.
const char *gait_last_error_message(void);

// Parses a trial CSV (`t` column then `<joint>_x,_y,_z` triples).
//
// # Safety
// `csv` and `subject_id` must be null or NUL-terminated strings; `out` must
// be null or writable.
enum GaitStatus gait_trial_parse_csv(const char *csv,
                                     const char *subject_id,
                                     uint32_t trial_no,
                                     struct GaitTrial **out_trial);

// Releases a trial. Null is ignored.
//
// # Safety
// `trial` must be null or a handle from [`gait_trial_parse_csv`] not yet
// freed.
void gait_trial_free(struct GaitTrial *trial);

// # Safety
// `trial` must be null or a live handle; `out_count` null or writable.
enum GaitStatus gait_trial_frame_count(const struct GaitTrial *trial, size_t *out_count);

// Fills untracked runs of at most `max_gap` frames in place. The trial is
// left untouched on failure.
//
// # Safety
// `trial` must be null or a live handle.
enum GaitStatus gait_trial_interpolate_gaps(struct GaitTrial *trial, size_t max_gap);

// Segments one gait cycle of `leg` from smoothed ankle speed.
//
// # Safety
// `trial` must be null or a live handle; `out_events` null or writable.
enum GaitStatus gait_trial_detect_events(const struct GaitTrial *trial,
                                         enum GaitLeg leg,
                                         double threshold,
                                         struct GaitEvents *out_events);

// Time-distance indices from the left-leg cycle and ranges of motion
// averaged over both legs.
//
// # Safety
// `trial` must be null or a live handle; `out_indices` null or writable.
enum GaitStatus gait_trial_indices(const struct GaitTrial *trial,
                                   double height_cm,
                                   double threshold,
                                   struct GaitIndices *out_indices);

// DTW distance between two series.
//
// # Safety
// `a` and `b` must point to `a_len` and `b_len` readable doubles.
enum GaitStatus gait_dtw_distance(const double *a,
                                  size_t a_len,
                                  const double *b,
                                  size_t b_len,
                                  double *out_distance);

// DTW distance plus warping path.
//
// # Safety
// As [`gait_dtw_distance`]; `out_result` null or writable.
enum GaitStatus gait_dtw(const double *a,
                         size_t a_len,
                         const double *b,
                         size_t b_len,
                         struct GaitDtwResult **out_result);

// Distance of a DTW result, or NaN for a null handle.
//
// # Safety
// `result` must be null or a live handle.
double gait_dtw_result_distance(const struct GaitDtwResult *result);

// Number of (i, j) pairs on the warping path, or 0 for a null handle.
//
// # Safety
// `result` must be null or a live handle.
size_t gait_dtw_result_path_len(const struct GaitDtwResult *result);

// Copies the warping path from the start corner into `rows` and `cols`,
// which must each hold `capacity` entries; `capacity` must be at least the
// path length.
//
// # Safety
// `result` must be null or a live handle; `rows` and `cols` must point to
// `capacity` writable entries.
enum GaitStatus gait_dtw_result_path(const struct GaitDtwResult *result,
                                     size_t *rows,
                                     size_t *cols,
                                     size_t capacity);

// Releases a DTW result. Null is ignored.
//
// # Safety
// `result` must be null or a handle from [`gait_dtw`] not yet freed.
void gait_dtw_result_free(struct GaitDtwResult *result);

// Pearson correlation with its 95% Fisher-z interval.
//
// # Safety
// `x` and `y` must point to `n` readable doubles.
enum GaitStatus gait_pearson_ci(const double *x,
                                const double *y,
                                size_t n,
                                struct GaitCorrelation *out_result);

// Paired two-tailed t-test of `x` against `y`.
//
// # Safety
// `x` and `y` must point to `n` readable doubles.
enum GaitStatus gait_paired_t(const double *x,
                              const double *y,
                              size_t n,
                              struct GaitTTest *out_result);

// ICC(2,1) with its 95% interval over a row-major subjects x trials table.
//
// # Safety
// `table` must point to `n_subjects * n_trials` readable doubles.
enum GaitStatus gait_icc(const double *table,
                         size_t n_subjects,
                         size_t n_trials,
                         struct GaitIcc *out_result);

// Student t cumulative distribution.
//
// # Safety
// `out_p` must be null or writable.
enum GaitStatus gait_t_cdf(double t, double df, double *out_p);

// Quantile of the F distribution.
//
// # Safety
// `out_x` must be null or writable.
enum GaitStatus gait_f_quantile(double p, double d1, double d2, double *out_x);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAIT_FFI_H */
