#ifndef LFLX_H
#define LFLX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum LflxStatus {
  LFLX_STATUS_OK = 0,
  LFLX_STATUS_NULL_POINTER = 1,
  LFLX_STATUS_INVALID_ARGUMENT = 2,
  LFLX_STATUS_INVALID_GRID = 3,
  LFLX_STATUS_SHAPE_MISMATCH = 4,
  LFLX_STATUS_DOMAIN = 5,
  /**
   * CFL violation, non-finite state or blow-up
   */
  LFLX_STATUS_NUMERICAL = 6,
  /**
   * bad magic, version mismatch or truncation in a snapshot file
   */
  LFLX_STATUS_FORMAT = 7,
  LFLX_STATUS_IO = 8,
  LFLX_STATUS_CONFIG = 9,
  LFLX_STATUS_PANIC = 10,
} LflxStatus;

/**
 * Kernel shape selector for [`lflx_mollifier_new`].
 */
typedef enum LflxProfile {
  LFLX_PROFILE_BUMP = 0,
  LFLX_PROFILE_GAUSSIAN = 1,
} LflxProfile;

/**
 * Spectral field (scalar or vector) on a periodic grid.
 */
typedef struct LflxField LflxField;

/**
 * Radial mollifier with cached multipliers.
 */
typedef struct LflxMollifier LflxMollifier;

/**
 * Output of a solver run: snapshots plus the energy budget.
 */
typedef struct LflxRun LflxRun;

/**
 * Integrated energy budget of a run.
 */
typedef struct LflxBudget {
  double initial_energy;
  double final_energy;
  double cumulative_dissipation;
  double cumulative_injection;
  /**
   * `E(T) - E(0) + ∫D - ∫I`
   */
  double residual;
} LflxBudget;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *lflx_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lflx_version(void);

/**
 * Wraps real samples into a field. `values` holds `components * n^dim`
 * doubles, component-major, row-major within a component.
 */
enum LflxStatus lflx_field_from_samples(uint32_t dim,
                                        uint32_t n,
                                        uint32_t components,
                                        const double *values,
                                        uintptr_t len,
                                        struct LflxField **out_field);

/**
 * Taylor–Green vortex on a `dim`-dimensional grid.
 */
enum LflxStatus lflx_field_taylor_green(uint32_t dim, uint32_t n, struct LflxField **out_field);

/**
 * Laminar shear `u = (sin y, 0[, 0])`.
 */
enum LflxStatus lflx_field_shear(uint32_t dim, uint32_t n, struct LflxField **out_field);

/**
 * Solenoidal random field with `E(k) ~ k^{-(2σ+1)}`, scaled to `‖u‖₂ = 1`.
 */
enum LflxStatus lflx_field_random_besov(uint32_t dim,
                                        uint32_t n,
                                        double sigma,
                                        uint64_t seed,
                                        struct LflxField **out_field);

void lflx_field_free(struct LflxField *field);

/**
 * Grid shape of a field.
 */
enum LflxStatus lflx_field_shape(const struct LflxField *field,
                                 uint32_t *dim,
                                 uint32_t *n,
                                 uint32_t *components);

/**
 * Number of doubles [`lflx_field_samples`] writes.
 */
enum LflxStatus lflx_field_sample_len(const struct LflxField *field, uintptr_t *len);

/**
 * Copies grid-point samples into `buf`, which must hold exactly
 * [`lflx_field_sample_len`] doubles.
 */
enum LflxStatus lflx_field_samples(const struct LflxField *field, double *buf, uintptr_t len);

/**
 * Kinetic energy `½∫|u|²`.
 */
enum LflxStatus lflx_field_energy(const struct LflxField *field, double *energy);

/**
 * `L^p` norm of `|u|`; pass `p = INFINITY` for the sup norm.
 */
enum LflxStatus lflx_field_lp_norm(const struct LflxField *field, double p, double *norm);

/**
 * Largest spectral divergence `max_k |k·û(k)|`.
 */
enum LflxStatus lflx_field_max_divergence(const struct LflxField *field, double *value);

enum LflxStatus lflx_mollifier_new(enum LflxProfile profile, struct LflxMollifier **out_mollifier);

void lflx_mollifier_free(struct LflxMollifier *m);

/**
 * Radial Fourier transform `Ĝ(ξ)` of the normalized kernel.
 */
enum LflxStatus lflx_mollifier_transform(const struct LflxMollifier *m,
                                         uint32_t dim,
                                         double xi,
                                         double *value);

/**
 * Coarse-grained field `ū_ℓ = G_ℓ * u`.
 */
enum LflxStatus lflx_filter(const struct LflxField *field,
                            double ell,
                            const struct LflxMollifier *m,
                            struct LflxField **out_field);

/**
 * Number of doubles [`lflx_flux`] writes: the refined `(2n)^dim` lattice.
 */
enum LflxStatus lflx_flux_len(const struct LflxField *field, uintptr_t *len);

/**
 * Pointwise flux `Π_ℓ = -∇ū_ℓ : τ_ℓ` on the refined lattice, plus its
 * integral over the box.
 */
enum LflxStatus lflx_flux(const struct LflxField *field,
                          double ell,
                          const struct LflxMollifier *m,
                          double *buf,
                          uintptr_t len,
                          double *integral);

/**
 * Direction-averaged structure functions `S_p(r)` for one order `p` at
 * lattice-multiple separations.
 */
enum LflxStatus lflx_structure_function(const struct LflxField *field,
                                        double p,
                                        const double *separations,
                                        uintptr_t count,
                                        double *values);

/**
 * `σ = α/(3 - α)` for `α ∈ [0, 1)`.
 */
enum LflxStatus lflx_sigma_of_alpha(double alpha, double *sigma);

/**
 * Inverse of [`lflx_sigma_of_alpha`].
 */
enum LflxStatus lflx_alpha_of_sigma(double sigma, double *alpha);

/**
 * Integrates from `initial` for `t_end` with step `dt`, storing every
 * `stride`-th step. `forcing_amplitude = 0` runs unforced; otherwise the
 * fixed low-mode forcing at wavenumber `k_f` is applied.
 */
enum LflxStatus lflx_run(const struct LflxField *initial,
                         double nu,
                         double dt,
                         double t_end,
                         uint32_t stride,
                         double forcing_amplitude,
                         uint32_t k_f,
                         struct LflxRun **out_run);

void lflx_run_free(struct LflxRun *run);

/**
 * Number of stored snapshots, including `t = 0`.
 */
enum LflxStatus lflx_run_snapshot_count(const struct LflxRun *run, uintptr_t *count);

/**
 * Copies snapshot `index` into a new field handle and reports its time.
 */
enum LflxStatus lflx_run_snapshot(const struct LflxRun *run,
                                  uintptr_t index,
                                  double *t,
                                  struct LflxField **out_field);

/**
 * Integrated energy budget of the run.
 */
enum LflxStatus lflx_run_budget(const struct LflxRun *run, struct LflxBudget *budget);

/**
 * Writes `field` as a binary snapshot with viscosity `nu` and time `t`. The
 * pressure is solved for the unforced flow and stored alongside.
 */
enum LflxStatus lflx_snapshot_save(const char *file,
                                   const struct LflxField *field,
                                   double nu,
                                   double t);

/**
 * Reads a snapshot's velocity. `nu`, `t` and `divergence_warning` may be
 * NULL; the warning flag is set when the stored field is not solenoidal.
 */
enum LflxStatus lflx_snapshot_load(const char *file,
                                   struct LflxField **out_field,
                                   double *nu,
                                   double *t,
                                   bool *divergence_warning);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LFLX_H */
