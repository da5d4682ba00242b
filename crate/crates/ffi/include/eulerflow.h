#ifndef EULERFLOW_H
#define EULERFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EulerflowStatus {
  EULERFLOW_STATUS_OK = 0,
  EULERFLOW_STATUS_NULL_POINTER = 1,
  EULERFLOW_STATUS_INVALID_ARGUMENT = 2,
  EULERFLOW_STATUS_DIMENSION_MISMATCH = 3,
  EULERFLOW_STATUS_NOT_LORENTZIAN = 4,
  EULERFLOW_STATUS_UNKNOWN_PRESET = 5,
  EULERFLOW_STATUS_NUMERIC_FAILURE = 6,
  EULERFLOW_STATUS_BUFFER_TOO_SMALL = 7,
  EULERFLOW_STATUS_PANIC = 99,
} EulerflowStatus;

typedef enum EulerflowAlgebra {
  EULERFLOW_ALGEBRA_SL2R = 0,
  EULERFLOW_ALGEBRA_SL2C = 1,
} EulerflowAlgebra;

typedef enum EulerflowTrajectoryStatus {
  EULERFLOW_TRAJECTORY_STATUS_COMPLETED_HORIZON = 0,
  EULERFLOW_TRAJECTORY_STATUS_ESCAPED = 1,
  EULERFLOW_TRAJECTORY_STATUS_STEP_UNDERFLOW = 2,
  EULERFLOW_TRAJECTORY_STATUS_STEP_LIMIT = 3,
} EulerflowTrajectoryStatus;

typedef enum EulerflowVerdict {
  EULERFLOW_VERDICT_COMPLETE_CERTIFIED = 0,
  EULERFLOW_VERDICT_INCOMPLETE_CERTIFIED = 1,
  EULERFLOW_VERDICT_COMPLETE_EVIDENCE = 2,
  EULERFLOW_VERDICT_INCOMPLETE_EVIDENCE = 3,
  EULERFLOW_VERDICT_UNDETERMINED = 4,
} EulerflowVerdict;

/*
 Opaque metric handle.
 */
typedef struct EulerflowMetric EulerflowMetric;

/*
 Opaque trajectory handle.
 */
typedef struct EulerflowTrajectory EulerflowTrajectory;

/*
 Summary of an integrated trajectory. Times that do not apply are NaN.
 */
typedef struct EulerflowTrajectoryInfo {
  enum EulerflowTrajectoryStatus status;
  size_t samples;
  double t_end;
  double escape_time;
  double escape_time_estimate;
  double sup_norm;
  double max_drift;
} EulerflowTrajectoryInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread (empty after a success).
 The pointer stays valid until the next call on the same thread.
 */
const char *eulerflow_last_error(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void eulerflow_string_free(char *s);

/*
 Builds a metric from `A^{-1}` in row-major order (`len = dim^2`).

 # Safety
 `ainv` must point to `len` doubles and `out` to writable storage.
 */
enum EulerflowStatus eulerflow_metric_new(enum EulerflowAlgebra algebra,
                                          const double *ainv,
                                          size_t len,
                                          struct EulerflowMetric **out);

/*
 Builds one of the built-in preset metrics by name.

 # Safety
 `name` must be a NUL-terminated string and `out` writable.
 */
enum EulerflowStatus eulerflow_metric_from_preset(const char *name, struct EulerflowMetric **out);

/*
 # Safety
 `m` must come from a metric constructor and not have been freed. Null is ignored.
 */
void eulerflow_metric_free(struct EulerflowMetric *m);

/*
 Dimension of the Lie algebra (3 or 6); 0 for a null handle.

 # Safety
 `m` must be a live handle or null.
 */
size_t eulerflow_metric_dim(const struct EulerflowMetric *m);

/*
 Writes the Euler field `F(x) = [x, A^{-1} x]` into `out` (both of length `len = dim`).

 # Safety
 `x` and `out` must point to `len` doubles.
 */
enum EulerflowStatus eulerflow_euler_field(const struct EulerflowMetric *m,
                                           const double *x,
                                           size_t len,
                                           double *out);

/*
 Integrates the Euler field from `u0` on `[0, horizon]` with default tolerances.

 # Safety
 `u0` must point to `len` doubles and `out` be writable.
 */
enum EulerflowStatus eulerflow_integrate(const struct EulerflowMetric *m,
                                         const double *u0,
                                         size_t len,
                                         double horizon,
                                         struct EulerflowTrajectory **out);

/*
 # Safety
 `t` must come from [`eulerflow_integrate`] and not have been freed. Null is ignored.
 */
void eulerflow_trajectory_free(struct EulerflowTrajectory *t);

/*
 # Safety
 `t` must be a live handle and `info` writable.
 */
enum EulerflowStatus eulerflow_trajectory_info(const struct EulerflowTrajectory *t,
                                               struct EulerflowTrajectoryInfo *info);

/*
 Copies sample `index` into `time` and `state` (`len = dim`).

 # Safety
 `t` must be a live handle, `time` writable and `state` hold `len` doubles.
 */
enum EulerflowStatus eulerflow_trajectory_sample(const struct EulerflowTrajectory *t,
                                                 size_t index,
                                                 double *time,
                                                 double *state,
                                                 size_t len);

/*
 Runs the completeness decision and reports its status. When `rule` is
 not null it receives the deciding rule id, to be released with
 [`eulerflow_string_free`].

 # Safety
 `m` must be a live handle, `status` writable, `rule` writable or null.
 */
enum EulerflowStatus eulerflow_classify(const struct EulerflowMetric *m,
                                        uint64_t seed,
                                        enum EulerflowVerdict *status,
                                        char **rule);

/*
 Full verdict as JSON, released with [`eulerflow_string_free`].

 # Safety
 `m` must be a live handle and `json` writable.
 */
enum EulerflowStatus eulerflow_classify_json(const struct EulerflowMetric *m,
                                             uint64_t seed,
                                             char **json);

/*
 Writes the Killing generators as `count` consecutive vectors of length
 `dim` into `out`, which holds `capacity` doubles. With too little room
 `count` is still set and [`EulerflowStatus::BufferTooSmall`] returned.

 # Safety
 `out` must hold `capacity` doubles (may be null when `capacity` is 0) and
 `count` be writable.
 */
enum EulerflowStatus eulerflow_find_killing(const struct EulerflowMetric *m,
                                            double *out,
                                            size_t capacity,
                                            size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EULERFLOW_H */
