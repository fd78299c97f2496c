#ifndef KGCOHERENT_H
#define KGCOHERENT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Moment selector for [`kg_free_moment`].
 */
typedef enum KgMoment {
  KG_MOMENT_X_MEAN = 0,
  KG_MOMENT_X_VAR = 1,
  KG_MOMENT_P_MEAN = 2,
  KG_MOMENT_P_VAR = 3,
  KG_MOMENT_V_MEAN = 4,
  KG_MOMENT_V_VAR = 5,
  KG_MOMENT_E_MEAN = 6,
  KG_MOMENT_E_VAR = 7,
  KG_MOMENT_UNCERTAINTY_PRODUCT = 8,
} KgMoment;

/**
 * Which reading of the transverse position series to use.
 */
typedef enum KgPositionVariant {
  KG_POSITION_VARIANT_PRINTED = 0,
  KG_POSITION_VARIANT_SYMMETRIC = 1,
} KgPositionVariant;

/**
 * Result of every fallible call.
 */
typedef enum KgStatus {
  KG_STATUS_OK = 0,
  KG_STATUS_NULL_POINTER = 1,
  KG_STATUS_INVALID_PARAMETER = 2,
  KG_STATUS_NON_CONVERGENCE = 3,
  KG_STATUS_PANIC = 4,
} KgStatus;

/**
 * Free charged packet in 1+1 dimensions.
 */
typedef struct KgFreeState KgFreeState;

/**
 * Packet in a uniform magnetic field with its Landau series.
 */
typedef struct KgMagneticState KgMagneticState;

/**
 * Real field built from a charge-parity pair.
 */
typedef struct KgNeutralState KgNeutralState;

/**
 * Time-independent expectations of a magnetic packet.
 */
typedef struct KgConserved {
  double energy;
  double x3dot;
  double l3;
  double r_mean;
  double r_sq_mean;
  double r_var;
  double r_gc_sq_mean;
  double occupation_sum;
} KgConserved;

/**
 * Classical helix with the same mean momenta.
 */
typedef struct KgClassical {
  double energy;
  double radius;
  double period;
  double parallel_velocity;
} KgClassical;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *kg_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *kg_version(void);

/**
 * Creates a free packet. `quad_rel_tol <= 0` selects the default.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum KgStatus kg_free_new(double lambda,
                          double alpha,
                          double p_mean,
                          int32_t epsilon,
                          double quad_rel_tol,
                          struct KgFreeState **out);

/**
 * # Safety
 * `h` must be null or a handle from [`kg_free_new`] not yet freed.
 */
void kg_free_free(struct KgFreeState *h);

/**
 * `⟨v⟩` and its variance.
 *
 * # Safety
 * `h` must be a live handle; out-pointers must be valid for writes.
 */
enum KgStatus kg_free_velocity(const struct KgFreeState *h, double *mean, double *var);

/**
 * `⟨E⟩` and its variance.
 *
 * # Safety
 * As [`kg_free_velocity`].
 */
enum KgStatus kg_free_energy(const struct KgFreeState *h, double *mean, double *var);

/**
 * One moment of the evolved packet at time `tau`.
 *
 * # Safety
 * As [`kg_free_velocity`]. `which` must be a declared `KgMoment` value; any
 * other integer is undefined behavior.
 */
enum KgStatus kg_free_moment(const struct KgFreeState *h,
                             double tau,
                             enum KgMoment which,
                             double *out);

/**
 * Probability density `ρ(τ, x)`.
 *
 * # Safety
 * As [`kg_free_velocity`].
 */
enum KgStatus kg_free_density(const struct KgFreeState *h, double tau, double x, double *out);

/**
 * Field `ψ(τ, x)` with the symmetric normalization.
 *
 * # Safety
 * As [`kg_free_velocity`].
 */
enum KgStatus kg_free_field(const struct KgFreeState *h,
                            double tau,
                            double x,
                            double *re,
                            double *im);

/**
 * Creates a neutral packet. `quad_rel_tol <= 0` selects the default.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum KgStatus kg_neutral_new(double lambda,
                             double alpha,
                             double p_mean,
                             double quad_rel_tol,
                             struct KgNeutralState **out);

/**
 * # Safety
 * `h` must be null or a handle from [`kg_neutral_new`] not yet freed.
 */
void kg_neutral_free(struct KgNeutralState *h);

/**
 * Neutral field at `(τ, x)`; the imaginary part is rounding noise.
 *
 * # Safety
 * `h` must be a live handle; out-pointers must be valid for writes.
 */
enum KgStatus kg_neutral_field(const struct KgNeutralState *h,
                               double tau,
                               double x,
                               double *re,
                               double *im);

/**
 * Creates a magnetic packet and sums its Landau series.
 * `tail_tol <= 0` and `quad_rel_tol <= 0` select the defaults.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum KgStatus kg_magnetic_new(double lambda_field,
                              double lambda_perp,
                              double lambda3,
                              double p1_mean,
                              double p3_mean,
                              double tail_tol,
                              double quad_rel_tol,
                              struct KgMagneticState **out);

/**
 * # Safety
 * `h` must be null or a handle from [`kg_magnetic_new`] not yet freed.
 */
void kg_magnetic_free(struct KgMagneticState *h);

/**
 * Conserved expectations.
 *
 * # Safety
 * `h` must be a live handle; `out` must be valid for writes.
 */
enum KgStatus kg_magnetic_conserved(const struct KgMagneticState *h, struct KgConserved *out);

/**
 * Classical helix values for the same mean momenta.
 *
 * # Safety
 * As [`kg_magnetic_conserved`].
 */
enum KgStatus kg_magnetic_classical(const struct KgMagneticState *h, struct KgClassical *out);

/**
 * `⟨x¹⟩, ⟨x²⟩, ⟨x³⟩` at time `tau`, written to `out[0..3]`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be valid for three writes.
 * `variant` must be a declared `KgPositionVariant` value.
 */
enum KgStatus kg_magnetic_position(const struct KgMagneticState *h,
                                   double tau,
                                   enum KgPositionVariant variant,
                                   double *out);

/**
 * `Δx³Δp₃` at time `tau`.
 *
 * # Safety
 * As [`kg_magnetic_conserved`].
 */
enum KgStatus kg_magnetic_x3_uncertainty(const struct KgMagneticState *h, double tau, double *out);

/**
 * Field `ψ(τ; ρ, φ, x³)` with the symmetric normalization.
 *
 * # Safety
 * `h` must be a live handle; out-pointers must be valid for writes.
 */
enum KgStatus kg_magnetic_field(const struct KgMagneticState *h,
                                double tau,
                                double rho,
                                double phi,
                                double x3,
                                double *re,
                                double *im);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* KGCOHERENT_H */
