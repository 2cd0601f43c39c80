#ifndef RIME_FFI_H
#define RIME_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum RimeStatus {
  RIME_STATUS_OK = 0,
  RIME_STATUS_INVALID_ARGUMENT = 1,
  RIME_STATUS_DATA_ERROR = 2,
  RIME_STATUS_INFEASIBLE = 3,
  RIME_STATUS_IO_ERROR = 4,
  RIME_STATUS_NULL_POINTER = 5,
  RIME_STATUS_BUFFER_TOO_SMALL = 6,
  RIME_STATUS_PANIC = 7,
} RimeStatus;

typedef enum RimeSourceKind {
  RIME_SOURCE_KIND_POINT = 0,
  RIME_SOURCE_KIND_GAUSSIAN = 1,
} RimeSourceKind;

/**
 * Source field addressed by [`rime_catalog_set_param`].
 */
typedef enum RimeField {
  RIME_FIELD_I = 0,
  RIME_FIELD_Q = 1,
  RIME_FIELD_U = 2,
  RIME_FIELD_V = 3,
  RIME_FIELD_ALPHA = 4,
  RIME_FIELD_L = 5,
  RIME_FIELD_M = 6,
  RIME_FIELD_EMAJ = 7,
  RIME_FIELD_EMIN = 8,
  RIME_FIELD_PA = 9,
} RimeField;

typedef enum RimePrecision {
  RIME_PRECISION_F32 = 0,
  RIME_PRECISION_F64 = 1,
} RimePrecision;

/**
 * Opaque sky model.
 */
typedef struct RimeCatalog RimeCatalog;

/**
 * Opaque observation.
 */
typedef struct RimeObservation RimeObservation;

typedef struct RimeObsDims {
  size_t ntime;
  size_t na;
  size_t nbl;
  size_t nchan;
} RimeObsDims;

typedef struct RimeChunkPlan {
  size_t chunk_timesteps;
  size_t num_chunks;
  uint64_t per_chunk_bytes;
  uint64_t total_bytes;
} RimeChunkPlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rime_version(void);

/**
 * Copy the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length
 * excluding the terminator; pass a null `buf` to query it.
 */
size_t rime_last_error_message(char *buf, size_t len);

/**
 * Load a sky model from a JSON file.
 */
enum RimeStatus rime_catalog_load(const char *path, struct RimeCatalog **out);

/**
 * Parse a sky model from a NUL-terminated JSON string.
 */
enum RimeStatus rime_catalog_from_json(const char *json, struct RimeCatalog **out);

/**
 * Release a catalog. Null is ignored.
 */
void rime_catalog_free(struct RimeCatalog *catalog);

enum RimeStatus rime_catalog_counts(const struct RimeCatalog *catalog,
                                    size_t *npsrc,
                                    size_t *ngsrc,
                                    size_t *ntime);

/**
 * Set one field of one source; Stokes fields are set for every timestep.
 */
enum RimeStatus rime_catalog_set_param(struct RimeCatalog *catalog,
                                       enum RimeSourceKind kind,
                                       size_t index,
                                       enum RimeField field,
                                       double value);

/**
 * Load an observation from a manifest directory or file.
 */
enum RimeStatus rime_observation_load(const char *path, struct RimeObservation **out);

/**
 * Release an observation. Null is ignored.
 */
void rime_observation_free(struct RimeObservation *obs);

enum RimeStatus rime_observation_dims(const struct RimeObservation *obs, struct RimeObsDims *out);

/**
 * Weighted χ² of the catalog's model against the observed data.
 */
enum RimeStatus rime_chi_squared(const struct RimeCatalog *catalog,
                                 const struct RimeObservation *obs,
                                 enum RimePrecision precision_,
                                 double *chi2);

/**
 * Gaussian log-likelihood `−½(χ² + Σ ln(2π/w))`.
 */
enum RimeStatus rime_log_likelihood(const struct RimeCatalog *catalog,
                                    const struct RimeObservation *obs,
                                    enum RimePrecision precision_,
                                    double *log_likelihood);

/**
 * Number of doubles [`rime_predict`] writes.
 */
enum RimeStatus rime_visibility_buffer_len(const struct RimeObservation *obs, size_t *len);

/**
 * Model visibilities into `buf` of `len` doubles.
 */
enum RimeStatus rime_predict(const struct RimeCatalog *catalog,
                             const struct RimeObservation *obs,
                             enum RimePrecision precision_,
                             double *buf,
                             size_t len);

enum RimeStatus rime_baseline_count(size_t na, size_t *nbl);

enum RimeStatus rime_ek_arithmetic_intensity(size_t npsrc, size_t ngsrc, double *ai);

enum RimeStatus rime_bsum_arithmetic_intensity(size_t npsrc, size_t ngsrc, double *ai);

/**
 * `min(peak, ai · bandwidth)` in GFLOPS/s.
 */
enum RimeStatus rime_roofline_attainable(double ai,
                                         double peak_gflops,
                                         double bandwidth_gbps,
                                         double *attainable);

/**
 * Time-chunk plan for the default array set under a byte budget.
 */
enum RimeStatus rime_plan_chunks(size_t ntime,
                                 size_t na,
                                 size_t nchan,
                                 size_t npsrc,
                                 size_t ngsrc,
                                 uint64_t budget_bytes,
                                 size_t slots,
                                 enum RimePrecision precision_,
                                 struct RimeChunkPlan *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RIME_FFI_H */
