#ifndef DARKSTATE_H
#define DARKSTATE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DsStatus {
  DS_STATUS_OK = 0,
  DS_STATUS_NULL_POINTER = 1,
  DS_STATUS_INVALID_ARGUMENT = 2,
  DS_STATUS_INVALID_STATE = 3,
  DS_STATUS_DIMENSION_MISMATCH = 4,
  DS_STATUS_DEGENERATE_COUPLING = 5,
  DS_STATUS_INCOMPLETE_MEASUREMENTS = 6,
  DS_STATUS_CONFIG = 7,
  DS_STATUS_OUTPUT = 8,
  DS_STATUS_IO = 9,
  DS_STATUS_BUDGET_REQUIRED = 10,
  DS_STATUS_PANIC = 11,
} DsStatus;

typedef enum DsMode {
  DS_MODE_PROTOCOL = 0,
  DS_MODE_REFERENCE = 1,
  DS_MODE_GATE_TOMOGRAPHY = 2,
} DsMode;

typedef struct DsDensityMatrix DsDensityMatrix;

typedef struct DsScenarioConfig DsScenarioConfig;

typedef struct DsScenarioResult DsScenarioResult;

/**
 * One `(phi, signal state)` row of a sweep. `state` indexes the labels
 * `0, 1, +, -, +i, -i`.
 */
typedef struct DsStatePoint {
  double phi;
  uint32_t state;
  double purity;
  double purity_std;
  double fidelity;
  double fidelity_std;
  double success;
  double success_std;
  double p1_env;
  double p1_env_std;
} DsStatePoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ds_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated and
 * NUL-terminated) and returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t ds_last_error_message(char *buf, size_t len);

/**
 * Creates a density matrix from row-major real and imaginary parts of a
 * `dim x dim` matrix.
 *
 * # Safety
 * `re` and `im` must point to `dim * dim` doubles; `result` must be writable.
 */
enum DsStatus ds_density_new(const double *re,
                             const double *im,
                             size_t dim,
                             struct DsDensityMatrix **result);

/**
 * # Safety
 * `rho` must be null or a handle from `ds_density_new` not yet freed.
 */
void ds_density_free(struct DsDensityMatrix *rho);

/**
 * # Safety
 * `rho` must be a live handle and `result` writable.
 */
enum DsStatus ds_density_purity(const struct DsDensityMatrix *rho, double *result);

/**
 * Fidelity with the product of the given single-qubit labels, written as a
 * space-separated list such as `"+ -i"`.
 *
 * # Safety
 * `rho` must be a live handle, `labels` a NUL-terminated string and `result`
 * writable.
 */
enum DsStatus ds_density_fidelity(const struct DsDensityMatrix *rho,
                                  const char *labels,
                                  double *result);

/**
 * # Safety
 * `rho` must be a live two-qubit handle and `result` writable.
 */
enum DsStatus ds_density_concurrence(const struct DsDensityMatrix *rho, double *result);

/**
 * # Safety
 * `rho` must be a live two-qubit handle and `result` writable.
 */
enum DsStatus ds_density_entanglement_of_formation(const struct DsDensityMatrix *rho,
                                                   double *result);

/**
 * Dephasing factor `q` of an environment with `|0>` population `p0`.
 *
 * # Safety
 * `re` and `im` must be writable.
 */
enum DsStatus ds_coherence_factor(double p0, double phi, double *re, double *im);

/**
 * Probability of heralding the dark state in one attempt.
 *
 * # Safety
 * `result` must be writable.
 */
enum DsStatus ds_herald_success_probability(double p0, double phi, double *result);

/**
 * Success probability of the post-selected CCP gate.
 *
 * # Safety
 * `result` must be writable.
 */
enum DsStatus ds_ccp_success_probability(double phi, double *result);

/**
 * Parses a TOML configuration (may be empty) for `mode`.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `result` writable.
 */
enum DsStatus ds_config_parse(const char *toml, enum DsMode mode, struct DsScenarioConfig **result);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum DsStatus ds_config_set_seed(struct DsScenarioConfig *config, uint64_t seed);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum DsStatus ds_config_set_bootstrap_samples(struct DsScenarioConfig *config, size_t samples);

/**
 * Coincidences per second at maximal transmittance.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum DsStatus ds_config_set_rate(struct DsScenarioConfig *config, double rate);

/**
 * # Safety
 * `config` must be a live handle and `phi` point to `len` doubles.
 */
enum DsStatus ds_config_set_phi_grid(struct DsScenarioConfig *config,
                                     const double *phi,
                                     size_t len);

/**
 * # Safety
 * `config` must be null or a live handle.
 */
void ds_config_free(struct DsScenarioConfig *config);

/**
 * Runs a protocol or reference sweep.
 *
 * # Safety
 * `config` must be a live handle and `result` writable.
 */
enum DsStatus ds_run_sweep(const struct DsScenarioConfig *config, struct DsScenarioResult **result);

/**
 * # Safety
 * `result` must be a live handle and `count` writable.
 */
enum DsStatus ds_result_point_count(const struct DsScenarioResult *result, size_t *count);

/**
 * # Safety
 * `result` must be a live handle and `point` writable.
 */
enum DsStatus ds_result_point(const struct DsScenarioResult *result,
                              size_t index,
                              struct DsStatePoint *point);

/**
 * Writes the sweep tables into an existing directory.
 *
 * # Safety
 * `result` must be a live handle and `dir` a NUL-terminated path.
 */
enum DsStatus ds_result_write_csvs(const struct DsScenarioResult *result, const char *dir);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
void ds_result_free(struct DsScenarioResult *result);

/**
 * Runs the acceptance suite and reports how many criteria passed.
 *
 * # Safety
 * `passed` and `total` must be writable.
 */
enum DsStatus ds_selftest(uint32_t *passed, uint32_t *total);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DARKSTATE_H */
