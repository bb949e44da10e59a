#ifndef TREELIKE_H
#define TREELIKE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

enum TlStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  TL_STATUS_OK = 0,
  TL_STATUS_NULL_POINTER = 1,
  TL_STATUS_INVALID_ARGUMENT = 2,
  TL_STATUS_PARSE = 3,
  TL_STATUS_VALIDATION = 4,
  TL_STATUS_DOMAIN = 5,
  TL_STATUS_SHAPE = 6,
  TL_STATUS_IO = 7,
  TL_STATUS_PANIC = 8,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum TlStatus TlStatus;
#else
typedef int32_t TlStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

typedef enum TlMetric {
  TL_METRIC_EUCLIDEAN = 0,
  TL_METRIC_POINCARE = 1,
} TlMetric;

typedef enum TlFormula {
  TL_FORMULA_FOUR_POINT = 0,
  TL_FORMULA_SLACK = 1,
} TlFormula;

/**
 * Opaque handle to a validated distance matrix.
 */
typedef struct TlDistanceMatrix TlDistanceMatrix;

typedef struct TlDeltaStats {
  double delta_max;
  double delta_avg;
  double delta_std;
  uint64_t samples_evaluated;
  /**
   * 1 when every quadruple was enumerated.
   */
  uint8_t exact;
  /**
   * Seed used for sampling; meaningless when `exact` is 1.
   */
  uint64_t seed;
} TlDeltaStats;

typedef struct TlUltraStats {
  double max_violation;
  double avg_violation;
  double std_violation;
  uint64_t num_violations;
  uint64_t total_triples;
  double avg_over_all_triples;
  uint8_t exact;
  uint64_t seed;
} TlUltraStats;

typedef struct TlNjStats {
  double nj_max;
  double nj_avg;
  double nj_std;
  uint64_t n;
} TlNjStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies a row-major `n x n` matrix and validates it with tolerance `tol`
 * (symmetry, zero diagonal, non-negative finite entries).
 *
 * # Safety
 * `data` must point at `n * n` readable doubles and `out` must be writable.
 */
TlStatus tl_matrix_from_buffer(const double *data,
                               size_t n,
                               double tol,
                               struct TlDistanceMatrix **out);

/**
 * Builds the pairwise distance matrix of `n` row-major points of dimension `dim`.
 * `metric` is a `TlMetric` value.
 *
 * With `TL_METRIC_POINCARE` and `ball_norm > 0` the points are first scaled so the largest
 * norm equals `ball_norm`; with `ball_norm == 0` they must already lie inside the unit ball.
 *
 * # Safety
 * `data` must point at `n * dim` readable doubles and `out` must be writable.
 */
TlStatus tl_matrix_from_embeddings(const double *data,
                                   size_t n,
                                   size_t dim,
                                   int32_t metric,
                                   double ball_norm,
                                   struct TlDistanceMatrix **out);

/**
 * Releases a matrix. Null is ignored.
 *
 * # Safety
 * `m` must be null or a handle from this library that has not been freed.
 */
void tl_matrix_free(struct TlDistanceMatrix *m);

/**
 * Number of points, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t tl_matrix_n(const struct TlDistanceMatrix *m);

/**
 * Copies the `n * n` entries into `buf`, which holds `len` doubles.
 *
 * # Safety
 * `m` must be a live handle and `buf` writable for `len` doubles.
 */
TlStatus tl_matrix_copy(const struct TlDistanceMatrix *m, double *buf, size_t len);

/**
 * Delta from `samples` random quadruples; enumerates when that covers every quadruple.
 * `f` is a `TlFormula` value.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
TlStatus tl_delta_sample(const struct TlDistanceMatrix *m,
                         uint64_t samples,
                         uint64_t seed,
                         int32_t f,
                         struct TlDeltaStats *out);

/**
 * Delta over every quadruple. `f` is a `TlFormula` value.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
TlStatus tl_delta_exact(const struct TlDistanceMatrix *m, int32_t f, struct TlDeltaStats *out);

/**
 * Ultrametricity from `samples` distinct random triples.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
TlStatus tl_ultra_sample(const struct TlDistanceMatrix *m,
                         uint64_t samples,
                         double epsilon,
                         uint64_t seed,
                         struct TlUltraStats *out);

/**
 * Ultrametricity over every triple.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
TlStatus tl_ultra_exact(const struct TlDistanceMatrix *m, double epsilon, struct TlUltraStats *out);

/**
 * Neighbor-joining |Q| statistics; all zero below three points.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
TlStatus tl_nj_scores(const struct TlDistanceMatrix *m, struct TlNjStats *out);

/**
 * Message for the last failed call on this thread, or null if none. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *tl_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tl_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TREELIKE_H */
