#ifndef ROCOVER_H
#define ROCOVER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum RocStatus {
  ROC_STATUS_OK = 0,
  ROC_STATUS_NULL_POINTER = 1,
  ROC_STATUS_INVALID_ARGUMENT = 2,
  ROC_STATUS_IO = 3,
  ROC_STATUS_PARSE = 4,
  ROC_STATUS_INFEASIBLE = 5,
  ROC_STATUS_PRECONDITION = 6,
  ROC_STATUS_ORACLE_UNAVAILABLE = 7,
  ROC_STATUS_BUFFER_TOO_SMALL = 8,
  ROC_STATUS_PANIC = 9,
} RocStatus;

/**
 * Opaque covering integer program handle.
 */
typedef struct RocCipInstance RocCipInstance;

/**
 * Opaque set system handle.
 */
typedef struct RocSetSystem RocSetSystem;

/**
 * Summary of `roc_run_trials`. `opt` and `ratio` are NaN when no OPT
 * reference was available.
 */
typedef struct RocTrialStats {
  size_t trials;
  double mean;
  double std;
  double min;
  double max;
  double ci;
  double opt;
  double ratio;
} RocTrialStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *roc_last_error_message(void);

/**
 * Builds a set system in compressed form: set `j` holds
 * `elements[offsets[j] .. offsets[j+1]]`, and `offsets` has `m + 1` entries.
 * Each set lists its elements in ascending order; every element must lie in
 * some set and every cost must be positive.
 *
 * # Safety
 * `offsets` must point to `m + 1` values, `elements` to `offsets[m]` values
 * and `costs` to `m` values; `out_sys` must be writable.
 */
enum RocStatus roc_setsystem_new(size_t n,
                                 size_t m,
                                 const size_t *offsets,
                                 const size_t *elements,
                                 const double *costs,
                                 struct RocSetSystem **out_sys);

/**
 * Loads a set-cover (or batched, as its underlying set system) instance file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out_sys` writable.
 */
enum RocStatus roc_setsystem_load(const char *path, struct RocSetSystem **out_sys);

/**
 * # Safety
 * `sys` must come from this library and not be used afterwards. Null is ignored.
 */
void roc_setsystem_free(struct RocSetSystem *sys);

/**
 * Number of elements; 0 for a null handle.
 *
 * # Safety
 * `sys` must be null or a live handle.
 */
size_t roc_setsystem_n(const struct RocSetSystem *sys);

/**
 * Number of sets; 0 for a null handle.
 *
 * # Safety
 * `sys` must be null or a live handle.
 */
size_t roc_setsystem_m(const struct RocSetSystem *sys);

/**
 * Loads a CIP instance file, or converts a set-cover file into one.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out_cip` writable.
 */
enum RocStatus roc_cip_load(const char *path, struct RocCipInstance **out_cip);

/**
 * The covering program whose rows are the elements of `sys`.
 *
 * # Safety
 * `sys` must be a live handle and `out_cip` writable.
 */
enum RocStatus roc_cip_from_setsystem(const struct RocSetSystem *sys,
                                      struct RocCipInstance **out_cip);

/**
 * # Safety
 * `cip` must come from this library and not be used afterwards. Null is ignored.
 */
void roc_cip_free(struct RocCipInstance *cip);

/**
 * Number of rows; 0 for a null handle.
 *
 * # Safety
 * `cip` must be null or a live handle.
 */
size_t roc_cip_n(const struct RocCipInstance *cip);

/**
 * Number of columns; 0 for a null handle.
 *
 * # Safety
 * `cip` must be null or a live handle.
 */
size_t roc_cip_m(const struct RocCipInstance *cip);

/**
 * One LearnOrCover run with budget `beta` on the arrival order and
 * randomness of trial `trial` under `seed`.
 *
 * # Safety
 * `sys` must be a live handle and `cost` writable.
 */
enum RocStatus roc_loc_run(const struct RocSetSystem *sys,
                           double beta,
                           uint64_t seed,
                           size_t trial,
                           double *cost);

/**
 * One run of the unit-cost variant; requires unit costs.
 *
 * # Safety
 * `sys` must be a live handle and `cost` writable.
 */
enum RocStatus roc_unit_loc_run(const struct RocSetSystem *sys,
                                uint64_t seed,
                                size_t trial,
                                double *cost);

/**
 * One run of the covering-program algorithm with budget `beta`.
 *
 * # Safety
 * `cip` must be a live handle and `cost` writable.
 */
enum RocStatus roc_cip_run(const struct RocCipInstance *cip,
                           double beta,
                           uint64_t seed,
                           size_t trial,
                           double *cost);

/**
 * Random-order trials. `algorithm` and `beta_mode` take the same strings as
 * the command line (`loc`, `naive`, ... and `known-opt`, `guess-double`,
 * `fixed:<v>`). Pass NaN for `opt` to let the library find a reference.
 *
 * # Safety
 * `sys` must be a live handle, the strings NUL-terminated and `stats` writable.
 */
enum RocStatus roc_run_trials(const struct RocSetSystem *sys,
                              const char *algorithm,
                              const char *beta_mode,
                              size_t trials,
                              uint64_t seed,
                              double opt,
                              struct RocTrialStats *stats);

/**
 * Minimum-cost cover. Writes the cost, whether optimality was proven within
 * `node_budget` search nodes, and the chosen set ids into `sets` (capacity
 * `sets_cap`). `sets_len` always receives the number of ids; if it exceeds
 * `sets_cap` the call returns `BufferTooSmall`.
 *
 * # Safety
 * `sys` must be a live handle; `cost`, `exact` and `sets_len` writable;
 * `sets` valid for `sets_cap` writes (may be null when `sets_cap` is 0).
 */
enum RocStatus roc_exact_opt(const struct RocSetSystem *sys,
                             uint64_t node_budget,
                             double *cost,
                             bool *exact,
                             size_t *sets,
                             size_t sets_cap,
                             size_t *sets_len);

/**
 * Cost of the offline greedy cover.
 *
 * # Safety
 * `sys` must be a live handle and `cost` writable.
 */
enum RocStatus roc_greedy(const struct RocSetSystem *sys, double *cost);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROCOVER_H */
