#ifndef COHERENCE_H
#define COHERENCE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Class bits returned by `coh_channel_classes`.
 */
#define COH_CLASS_CPTP 1

#define COH_CLASS_MIO 2

#define COH_CLASS_DIO 4

#define COH_CLASS_IO 8

#define COH_CLASS_SIO 16

typedef enum CohStatus {
  COH_STATUS_OK = 0,
  COH_STATUS_NULL_POINTER = 1,
  COH_STATUS_INVALID_INPUT = 2,
  COH_STATUS_UNSUPPORTED = 3,
  COH_STATUS_CONSTRUCTION_FAILED = 4,
  COH_STATUS_PANIC = 5,
} CohStatus;

typedef enum CohMeasure {
  COH_MEASURE_GEOMETRIC = 0,
  COH_MEASURE_RELATIVE_ENTROPY = 1,
  COH_MEASURE_L1 = 2,
} CohMeasure;

/**
 * A Kraus channel with its certified classes.
 */
typedef struct CohChannel CohChannel;

/**
 * A validated density matrix.
 */
typedef struct CohDensity CohDensity;

/**
 * Result of a numerical estimate.
 */
typedef struct CohEstimate {
  double value;
  /**
   * True when `value` is only an upper bound on the infimum.
   */
  bool upper_bound;
  bool converged;
  size_t ensemble_size;
} CohEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *coh_last_error(void);

/**
 * Validates a `dim x dim` row-major matrix. `im` may be null for a real matrix.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `dim * dim` doubles; `out` must be writable.
 */
enum CohStatus coh_density_new(size_t dim,
                               const double *re,
                               const double *im,
                               struct CohDensity **out);

/**
 * Parses a state file body: `{"dim", "matrix"}` or `{"dim", "vector"}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CohStatus coh_density_from_json(const char *json, struct CohDensity **out);

/**
 * Dimension of the state, or 0 for a null handle.
 *
 * # Safety
 * `rho` must be null or a live handle.
 */
size_t coh_density_dim(const struct CohDensity *rho);

/**
 * Reads entry `(i, j)`.
 *
 * # Safety
 * `rho` must be a live handle; `re` and `im` must be writable.
 */
enum CohStatus coh_density_entry(const struct CohDensity *rho,
                                 size_t i,
                                 size_t j,
                                 double *re,
                                 double *im);

/**
 * # Safety
 * `rho` must be null or a handle not freed before.
 */
void coh_density_free(struct CohDensity *rho);

/**
 * Incoherent channel sending `|0><0|` to `diag(diag)`, where `diag` is a
 * probability vector of length `n`.
 *
 * # Safety
 * `diag` must point to `n` doubles; `out` must be writable.
 */
enum CohStatus coh_channel_preparation(const double *diag, size_t n, struct CohChannel **out);

/**
 * Purely dephasing channel sending the canonical pure state of `rho`
 * (amplitudes `sqrt(rho_ii)`) to `rho`.
 *
 * # Safety
 * `rho` must be a live handle; `out` must be writable.
 */
enum CohStatus coh_channel_dephasing(const struct CohDensity *rho, struct CohChannel **out);

/**
 * Parses and classifies a channel file body `{"dim_in", "dim_out", "kraus"}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CohStatus coh_channel_from_json(const char *json, struct CohChannel **out);

/**
 * Bitwise OR of the `COH_CLASS_*` flags the channel was certified for.
 *
 * # Safety
 * `ch` must be null or a live handle.
 */
uint32_t coh_channel_classes(const struct CohChannel *ch);

/**
 * Number of Kraus operators, or 0 for a null handle.
 *
 * # Safety
 * `ch` must be null or a live handle.
 */
size_t coh_channel_kraus_count(const struct CohChannel *ch);

/**
 * Applies the channel to `rho`, returning a new state.
 *
 * # Safety
 * `ch` and `rho` must be live handles; `out` must be writable.
 */
enum CohStatus coh_channel_apply(const struct CohChannel *ch,
                                 const struct CohDensity *rho,
                                 struct CohDensity **out);

/**
 * # Safety
 * `ch` must be null or a handle not freed before.
 */
void coh_channel_free(struct CohChannel *ch);

/**
 * Closed-form monotone of a qubit.
 *
 * # Safety
 * `rho` must be a live handle; `value` must be writable.
 */
enum CohStatus coh_qubit_cm(const struct CohDensity *rho, enum CohMeasure measure, double *value);

/**
 * Seeded estimate of the monotone (infimum of `f` at the aggregate vector).
 *
 * # Safety
 * `rho` must be a live handle; `out` must be writable.
 */
enum CohStatus coh_cm_estimate(const struct CohDensity *rho,
                               enum CohMeasure measure,
                               uint64_t seed,
                               size_t restarts,
                               struct CohEstimate *out);

/**
 * Seeded estimate of the convex roof (infimum of the average of `f`).
 *
 * # Safety
 * `rho` must be a live handle; `out` must be writable.
 */
enum CohStatus coh_cf_estimate(const struct CohDensity *rho,
                               enum CohMeasure measure,
                               uint64_t seed,
                               size_t restarts,
                               struct CohEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COHERENCE_H */
