#ifndef CLIFFORD_HULL_H
#define CLIFFORD_HULL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum ChStatus {
  CH_STATUS_OK = 0,
  CH_STATUS_NULL_POINTER = 1,
  CH_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Buffer too small; the required length was written where provided.
   */
  CH_STATUS_BUFFER_TOO_SMALL = 3,
  /**
   * Exact orientation determinant vanished (non-general-position input).
   */
  CH_STATUS_DEGENERATE_TIE = 4,
  /**
   * Geometry has no cap (coincident or coplanar embedded points).
   */
  CH_STATUS_GEOMETRY = 5,
  CH_STATUS_INVARIANT_VIOLATION = 6,
  CH_STATUS_PANIC = 7,
} ChStatus;

/**
 * Opaque convex hull.
 */
typedef struct ChHull ChHull;

/**
 * Opaque realized point process.
 */
typedef struct ChSample ChSample;

/**
 * Face numbers of a 4-polytope.
 */
typedef struct ChFVector {
  uint64_t f0;
  uint64_t f1;
  uint64_t f2;
  uint64_t f3;
} ChFVector;

/**
 * One simulated hull.
 */
typedef struct ChTrialRecord {
  uint64_t stream_index;
  double lambda;
  uint64_t n_points;
  struct ChFVector fvector;
  double vbar;
  int64_t euler_residual;
  int64_t r1_residual;
  int64_t r2_residual;
  /**
   * 1 when fewer than five points were sampled.
   */
  int32_t degenerate;
} ChTrialRecord;

/**
 * Cap `a² sin²((φ−φ₀)/2) + b² sin²((ψ−ψ₀)/2) ≤ 1`.
 */
typedef struct ChCap {
  double a;
  double b;
  double phi0;
  double psi0;
} ChCap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last failure message of this thread into `buf` (NUL-terminated,
 * truncated to `len`) and returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t ch_last_error_message(char *buf, size_t len);

/**
 * Builds the hull of `n_points` points given as `4 * n_points` doubles.
 *
 * # Safety
 * `coords` must be valid for `4 * n_points` reads (or null when
 * `n_points == 0`); `out` must be valid for one write.
 */
enum ChStatus ch_hull_build(const double *coords, size_t n_points, struct ChHull **out);

/**
 * Face numbers, with the conventions for fewer than five points.
 *
 * # Safety
 * `hull` must come from [`ch_hull_build`]; `out` must be valid for one write.
 */
enum ChStatus ch_hull_fvector(const struct ChHull *hull, struct ChFVector *out);

/**
 * Mean vertex valence `2 f1 / f0`.
 *
 * # Safety
 * `hull` must come from [`ch_hull_build`]; `out` must be valid for one write.
 */
enum ChStatus ch_hull_mean_valence(const struct ChHull *hull, double *out);

/**
 * Whether the facet complex passes every structural check (1) or not (0).
 *
 * # Safety
 * `hull` must come from [`ch_hull_build`]; `out` must be valid for one write.
 */
enum ChStatus ch_hull_validate(const struct ChHull *hull, int32_t *out);

/**
 * Writes the facets as sorted index quadruples, in lexicographic order, to
 * `buf` (room for `capacity` facets) and their count to `count`. With a
 * short or null buffer only `count` is written.
 *
 * # Safety
 * `hull` must come from [`ch_hull_build`]; `count` must be valid for one
 * write; `buf` must be null or valid for `4 * capacity` writes.
 */
enum ChStatus ch_hull_facets(const struct ChHull *hull,
                             uint32_t *buf,
                             size_t capacity,
                             size_t *count);

/**
 * Releases a hull; null is a no-op.
 *
 * # Safety
 * `hull` must be null or come from [`ch_hull_build`] and not be used again.
 */
void ch_hull_free(struct ChHull *hull);

/**
 * Samples a Poisson process of rate `lambda` on the torus from the stream
 * `(master_seed, stream_index)`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum ChStatus ch_sample_process(double lambda,
                                uint64_t master_seed,
                                uint64_t stream_index,
                                struct ChSample **out);

/**
 * Number of points in a sample.
 *
 * # Safety
 * `sample` must come from [`ch_sample_process`]; `out` must be valid for one write.
 */
enum ChStatus ch_sample_len(const struct ChSample *sample, size_t *out);

/**
 * Writes the points as `(phi, psi)` pairs to `buf` (room for `capacity`
 * points) and their count to `count`.
 *
 * # Safety
 * `sample` must come from [`ch_sample_process`]; `count` must be valid for
 * one write; `buf` must be null or valid for `2 * capacity` writes.
 */
enum ChStatus ch_sample_angles(const struct ChSample *sample,
                               double *buf,
                               size_t capacity,
                               size_t *count);

/**
 * Releases a sample; null is a no-op.
 *
 * # Safety
 * `sample` must be null or come from [`ch_sample_process`] and not be used again.
 */
void ch_sample_free(struct ChSample *sample);

/**
 * Samples and hulls one process from the stream `(master_seed, stream_index)`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum ChStatus ch_simulate_trial(double lambda,
                                uint64_t master_seed,
                                uint64_t stream_index,
                                struct ChTrialRecord *out);

/**
 * Smaller cap cut by the hyperplane through four torus points, given as
 * `(phi, psi)` pairs in `angles[0..8]`.
 *
 * # Safety
 * `angles` must be valid for 8 reads; `out` must be valid for one write.
 */
enum ChStatus ch_cap_from_points(const double *angles, struct ChCap *out);

/**
 * Area of the cap with shape parameters `a`, `b` (`a² + b² ≥ 2`).
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum ChStatus ch_cap_measure(double a, double b, double *out);

/**
 * `h(ν) = E[1/(ζ+4)]` for `ζ ~ Pois(ν)`, `ν > 0`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum ChStatus ch_h(double nu, double *out);

/**
 * `∫∫ α²β² dα dβ` over `{max(α, β) < 1/100, αβ < τ}`, `0 < τ < 10⁻⁴`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum ChStatus ch_alpha_beta_integral(double tau, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLIFFORD_HULL_H */
