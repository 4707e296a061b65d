#ifndef TUMOR_THERMO_H
#define TUMOR_THERMO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TtStatus {
  TT_STATUS_OK = 0,
  TT_STATUS_NULL_POINTER = 1,
  TT_STATUS_INVALID_ARGUMENT = 2,
  TT_STATUS_VALIDATION = 3,
  TT_STATUS_SOLVER = 4,
  TT_STATUS_IO = 5,
  TT_STATUS_PANIC = 6,
} TtStatus;

typedef enum TtParam {
  TT_PARAM_PROLIFERATION = 0,
  TT_PARAM_APOPTOSIS = 1,
  TT_PARAM_CONSUMPTION = 2,
  TT_PARAM_TRANSFER = 3,
  TT_PARAM_VASCULAR_NUTRIENT = 4,
  TT_PARAM_RELAXATION = 5,
  TT_PARAM_SPECIFIC_HEAT = 6,
  TT_PARAM_INTERFACE = 7,
  TT_PARAM_CONDUCTIVITY_EXPONENT = 8,
} TtParam;

typedef enum TtRegulator {
  TT_REGULATOR_SMOOTH_STEP = 0,
  TT_REGULATOR_SATURATING = 1,
} TtRegulator;

typedef enum TtField {
  TT_FIELD_PHI = 0,
  TT_FIELD_THETA = 1,
  TT_FIELD_SIGMA = 2,
} TtField;

/**
 * Opaque model parameter set.
 */
typedef struct TtParams TtParams;

/**
 * Opaque simulation: parameters, controls and the current state.
 */
typedef struct TtSimulation TtSimulation;

/**
 * Diagnostics of one accepted step.
 */
typedef struct TtStepReport {
  double t;
  double dt_used;
  size_t newton_iters_phi;
  size_t newton_iters_theta;
  size_t picard_iters;
  double picard_contraction;
  double min_theta;
  double min_phi;
  double min_sigma;
  double max_sigma;
  double energy_residual;
  /**
   * NaN when θ is not strictly positive.
   */
  double entropy_increment;
} TtStepReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *tt_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tt_version(void);

/**
 * Default parameters. Release with [`tt_params_free`].
 */
struct TtParams *tt_params_new(void);

/**
 * # Safety
 * `params` must be null or a pointer returned by [`tt_params_new`] that has
 * not been freed.
 */
void tt_params_free(struct TtParams *params);

/**
 * Sets one parameter. The whole set is validated; an invalid value leaves
 * the parameters unchanged.
 *
 * # Safety
 * `params` must be a live handle from [`tt_params_new`].
 */
enum TtStatus tt_params_set(struct TtParams *params, enum TtParam which, double value);

/**
 * # Safety
 * `params` must be a live handle and `out` a valid pointer to a double.
 */
enum TtStatus tt_params_get(const struct TtParams *params, enum TtParam which, double *out);

/**
 * # Safety
 * `params` must be a live handle.
 */
enum TtStatus tt_params_set_regulator(struct TtParams *params, enum TtRegulator regulator);

/**
 * Creates a simulation on a `dim`-dimensional box with `cells[a]` cells of
 * total length `extent[a]` along axis `a`, starting from the rest state at
 * `t = 0` with nominal step `dt`. Fields are stored row-major with axis 0
 * varying slowest.
 *
 * # Safety
 * `params` must be a live handle, `cells` and `extent` must point to `dim`
 * elements and `out` must be a valid pointer.
 */
enum TtStatus tt_sim_new(const struct TtParams *params,
                         size_t dim,
                         const size_t *cells,
                         const double *extent,
                         double dt,
                         struct TtSimulation **out);

/**
 * Creates a simulation from a configuration file, including its initial
 * data and controls.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TtStatus tt_sim_from_config(const char *path, struct TtSimulation **out);

/**
 * # Safety
 * `sim` must be null or a live simulation handle.
 */
void tt_sim_free(struct TtSimulation *sim);

/**
 * Number of cells; 0 for a null handle.
 *
 * # Safety
 * `sim` must be null or a live simulation handle.
 */
size_t tt_sim_cell_count(const struct TtSimulation *sim);

/**
 * # Safety
 * `sim` must be a live handle.
 */
enum TtStatus tt_sim_set_dt(struct TtSimulation *sim, double dt);

/**
 * Enables or disables the Picard outer iteration.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum TtStatus tt_sim_set_picard(struct TtSimulation *sim,
                                bool enabled,
                                double tol,
                                size_t max_iter);

/**
 * Replaces one field with `len` values.
 *
 * # Safety
 * `sim` must be a live handle and `values` must point to `len` doubles.
 */
enum TtStatus tt_sim_set_field(struct TtSimulation *sim,
                               enum TtField which,
                               const double *values,
                               size_t len);

/**
 * Copies one field into `out`, which must hold `len` = cell count doubles.
 *
 * # Safety
 * `sim` must be a live handle and `out` must point to `len` writable doubles.
 */
enum TtStatus tt_sim_get_field(const struct TtSimulation *sim,
                               enum TtField which,
                               double *out,
                               size_t len);

/**
 * Advances one step of the nominal size, halving on solver failure. On
 * failure the state is unchanged. `report` may be null.
 *
 * # Safety
 * `sim` must be a live handle; `report` null or valid.
 */
enum TtStatus tt_sim_step(struct TtSimulation *sim, struct TtStepReport *report);

/**
 * Integrates to `t_final`, shortening the last step to land exactly.
 * `steps` (may be null) receives the number of accepted steps. On failure
 * the state is that of the last accepted step.
 *
 * # Safety
 * `sim` must be a live handle; `steps` null or valid.
 */
enum TtStatus tt_sim_run(struct TtSimulation *sim, double t_final, size_t *steps);

/**
 * # Safety
 * `sim` must be a live handle and `out` valid.
 */
enum TtStatus tt_sim_time(const struct TtSimulation *sim, double *out);

/**
 * Internal energy of the current state.
 *
 * # Safety
 * `sim` must be a live handle and `out` valid.
 */
enum TtStatus tt_sim_energy(const struct TtSimulation *sim, double *out);

/**
 * Total entropy of the current state; fails unless θ > 0 everywhere.
 *
 * # Safety
 * `sim` must be a live handle and `out` valid.
 */
enum TtStatus tt_sim_entropy(const struct TtSimulation *sim, double *out);

/**
 * Writes the current state as a snapshot file.
 *
 * # Safety
 * `sim` must be a live handle and `path` a NUL-terminated string.
 */
enum TtStatus tt_sim_write_snapshot(const struct TtSimulation *sim, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TUMOR_THERMO_H */
