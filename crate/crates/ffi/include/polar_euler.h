#ifndef POLAR_EULER_H
#define POLAR_EULER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PeStatus {
  PE_STATUS_OK = 0,
  PE_STATUS_NULL_POINTER = 1,
  PE_STATUS_INVALID_UTF8 = 2,
  PE_STATUS_INVALID_ARGUMENT = 3,
  PE_STATUS_DOMAIN = 4,
  PE_STATUS_ALIASING = 5,
  PE_STATUS_RESOLUTION = 6,
  PE_STATUS_VERIFICATION = 7,
  PE_STATUS_CONTRACT = 8,
  PE_STATUS_CONFIG = 9,
  PE_STATUS_IO = 10,
  PE_STATUS_SERDE = 11,
  PE_STATUS_PANIC = 12,
  PE_STATUS_OUT_OF_RANGE = 13,
} PeStatus;

typedef enum PeTermination {
  PE_TERMINATION_COMPLETED = 0,
  PE_TERMINATION_RESOLUTION = 1,
  PE_TERMINATION_NON_FINITE = 2,
} PeTermination;

typedef struct PeConfig PeConfig;

typedef struct PeField PeField;

typedef struct PeRun PeRun;

/**
 * One monitor row; absent values are NaN.
 */
typedef struct PeMonitorRow {
  double t;
  double l1;
  double l2;
  double linf;
  double supp_osc_lo;
  double supp_osc_hi;
  double c1_osc;
  /**
   * Norm of the oscillatory part at the first monitored order.
   */
  double hs_first;
  double pseudo_err_l2;
  double pseudo_err_rel;
} PeMonitorRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *pe_version(void);

/**
 * Copies the last error message of this thread into `buf` (truncated,
 * always NUL-terminated) and returns its full length, 0 if none.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t pe_last_error(char *buf, size_t len);

/**
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum PeStatus pe_config_default(struct PeConfig **out);

/**
 * Parses a TOML run configuration.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` a valid handle slot.
 */
enum PeStatus pe_config_from_toml(const char *toml, struct PeConfig **out);

/**
 * Applies one `key.path=value` override.
 *
 * # Safety
 * `cfg` must come from `pe_config_*`; `kv` must be NUL-terminated.
 */
enum PeStatus pe_config_set(struct PeConfig *cfg, const char *kv);

/**
 * # Safety
 * `cfg` must be null or come from `pe_config_*`, and not be used afterwards.
 */
void pe_config_free(struct PeConfig *cfg);

/**
 * Builds the initial data. `valid` receives the verification verdict; a
 * field is returned either way.
 *
 * # Safety
 * Pointers must be valid; `out` receives a handle owned by the caller.
 */
enum PeStatus pe_build(const struct PeConfig *cfg, struct PeField **out, bool *valid);

/**
 * Reads a field from its JSON serialization.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` a valid handle slot.
 */
enum PeStatus pe_field_from_json(const char *json, struct PeField **out);

/**
 * Homogeneous (`homogeneous = true`) or inhomogeneous order-`s` norm.
 *
 * # Safety
 * `field` must come from this library; `out` must be writable.
 */
enum PeStatus pe_field_sobolev_norm(const struct PeField *field,
                                    double s,
                                    bool homogeneous,
                                    double *out);

/**
 * `L^p` norm, `p = INFINITY` allowed.
 *
 * # Safety
 * `field` must come from this library; `out` must be writable.
 */
enum PeStatus pe_field_lp_norm(const struct PeField *field, double p, double *out);

/**
 * Angular symmetry order of the stored modes (1 when none is declared).
 *
 * # Safety
 * `field` must come from this library.
 */
size_t pe_field_base(const struct PeField *field);

/**
 * # Safety
 * `field` must be null or come from this library, and not be used afterwards.
 */
void pe_field_free(struct PeField *field);

/**
 * Builds and evolves per the configuration. Runs stopped by the resolution
 * guard still return a handle; check `pe_run_termination`.
 *
 * # Safety
 * `cfg` must come from `pe_config_*`; `out` must be a valid handle slot.
 */
enum PeStatus pe_evolve(const struct PeConfig *cfg, struct PeRun **out);

/**
 * # Safety
 * `run` must come from `pe_evolve`.
 */
size_t pe_run_rows(const struct PeRun *run);

/**
 * # Safety
 * `run` must come from `pe_evolve`; `out` must be writable.
 */
enum PeStatus pe_run_row(const struct PeRun *run, size_t i, struct PeMonitorRow *out);

/**
 * # Safety
 * `run` must come from `pe_evolve`; `out` must be writable.
 */
enum PeStatus pe_run_termination(const struct PeRun *run, enum PeTermination *out);

/**
 * JSON summary of the run, valid until `pe_run_free`.
 *
 * # Safety
 * `run` must come from `pe_evolve`.
 */
const char *pe_run_summary_json(const struct PeRun *run);

/**
 * Copy of the final vorticity as a new field handle.
 *
 * # Safety
 * `run` must come from `pe_evolve`; `out` must be a valid handle slot.
 */
enum PeStatus pe_run_final_field(const struct PeRun *run, struct PeField **out);

/**
 * # Safety
 * `run` must be null or come from `pe_evolve`, and not be used afterwards.
 */
void pe_run_free(struct PeRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLAR_EULER_H */
