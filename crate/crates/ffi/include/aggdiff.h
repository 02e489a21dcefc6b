/* Generated by cbindgen from crates/ffi; do not edit. */

#ifndef AGGDIFF_H
#define AGGDIFF_H

#include <stddef.h>
#include <stdint.h>

typedef enum AggdiffStatus {
  AGGDIFF_STATUS_OK = 0,
  AGGDIFF_STATUS_NULL_POINTER = 1,
  AGGDIFF_STATUS_INVALID_ARGUMENT = 2,
  AGGDIFF_STATUS_DOMAIN = 3,
  AGGDIFF_STATUS_REGIME = 4,
  AGGDIFF_STATUS_NOT_CONVERGED = 5,
  AGGDIFF_STATUS_COLLAPSE = 6,
  AGGDIFF_STATUS_INSTABILITY = 7,
  AGGDIFF_STATUS_BUFFER_TOO_SMALL = 8,
  AGGDIFF_STATUS_PANIC = 9,
  AGGDIFF_STATUS_OTHER = 10,
} AggdiffStatus;

// Piecewise-constant radial density.
typedef struct AggdiffDensity AggdiffDensity;

// Model parameters (N, k, m, χ, M).
typedef struct AggdiffParams AggdiffParams;

// Result of the steady-state solver.
typedef struct AggdiffSteady AggdiffSteady;

// Free-energy breakdown.
typedef struct AggdiffEnergy {
  double entropy;
  double interaction;
  double confinement;
  double total;
} AggdiffEnergy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread; empty if none.
// The pointer stays valid until the next failing call on the same thread.
const char *aggdiff_last_error(void);

// # Safety
// `out_params` must be a valid pointer.
enum AggdiffStatus aggdiff_params_new(size_t n,
                                      double k,
                                      double m,
                                      double chi,
                                      double mass,
                                      struct AggdiffParams **out_params);

// # Safety
// `params` must come from `aggdiff_params_new` or be null.
void aggdiff_params_free(struct AggdiffParams *params);

// Fair-competition exponent 1 - k/N.
//
// # Safety
// Pointers must be valid.
enum AggdiffStatus aggdiff_params_m_c(const struct AggdiffParams *params, double *out_value);

// Density from `cells + 1` grid nodes (starting at 0) and `cells` values.
//
// # Safety
// `grid` must hold `cells + 1` doubles and `values` `cells` doubles.
enum AggdiffStatus aggdiff_density_new(const double *grid,
                                       const double *values,
                                       size_t cells,
                                       struct AggdiffDensity **out_density);

// # Safety
// `density` must come from this library or be null.
void aggdiff_density_free(struct AggdiffDensity *density);

// # Safety
// Pointers must be valid.
enum AggdiffStatus aggdiff_density_cells(const struct AggdiffDensity *density, size_t *out_cells);

// Copy grid nodes (`cells + 1`) and values (`cells`) into caller buffers.
// Either buffer may be null to skip it.
//
// # Safety
// Non-null buffers must hold at least the stated lengths.
enum AggdiffStatus aggdiff_density_copy(const struct AggdiffDensity *density,
                                        double *grid,
                                        size_t grid_len,
                                        double *values,
                                        size_t values_len);

// # Safety
// Pointers must be valid.
enum AggdiffStatus aggdiff_density_mass(const struct AggdiffDensity *density,
                                        size_t n,
                                        double *out_mass);

// Gauss hypergeometric function 2F1(a, b; c; z).
//
// # Safety
// `out_value` must be valid.
enum AggdiffStatus aggdiff_hyp2f1(double a, double b, double c, double z, double *out_value);

// Radial kernel profile ϑ(s) for dimension `n` and exponent `k`.
//
// # Safety
// `out_value` must be valid.
enum AggdiffStatus aggdiff_theta(size_t n, double k, double s, double *out_value);

// # Safety
// Pointers must be valid.
enum AggdiffStatus aggdiff_energy(const struct AggdiffParams *params,
                                  const struct AggdiffDensity *density,
                                  struct AggdiffEnergy *out_energy);

// Solve for the radial steady state on `cells` cells; `tol <= 0` selects the default.
//
// # Safety
// Pointers must be valid.
enum AggdiffStatus aggdiff_steady_solve(const struct AggdiffParams *params,
                                        size_t cells,
                                        double tol,
                                        struct AggdiffSteady **out_steady);

// # Safety
// `steady` must come from `aggdiff_steady_solve` or be null.
void aggdiff_steady_free(struct AggdiffSteady *steady);

// Lagrange constant and support radius of a solved steady state.
//
// # Safety
// `steady` must be valid; outputs may be null to skip them.
enum AggdiffStatus aggdiff_steady_summary(const struct AggdiffSteady *steady,
                                          double *out_constant,
                                          double *out_support_radius);

// New density handle holding a copy of the steady profile.
//
// # Safety
// Pointers must be valid.
enum AggdiffStatus aggdiff_steady_density(const struct AggdiffSteady *steady,
                                          struct AggdiffDensity **out_density);

// ϑ(t)/k minus the tangent comparison curve with contact point c.
//
// # Safety
// `out_value` must be valid.
enum AggdiffStatus aggdiff_comparison_residual(size_t n,
                                               double k,
                                               double t,
                                               double c,
                                               double *out_value);

// Scan the (t, c) lattice; reports the violation count and minimum residual.
//
// # Safety
// Outputs may be null to skip them.
enum AggdiffStatus aggdiff_convexity_scan(size_t n,
                                          double k,
                                          size_t resolution,
                                          double tol,
                                          size_t *out_violations,
                                          double *out_min_residual);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AGGDIFF_H */
