#ifndef SERRIN_ANNULUS_H
#define SERRIN_ANNULUS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SaStatus {
  SA_STATUS_OK = 0,
  SA_STATUS_INVALID_ARGUMENT = 1,
  SA_STATUS_INADMISSIBLE = 2,
  SA_STATUS_NOT_CONVERGED = 3,
  SA_STATUS_SINGULAR = 4,
  SA_STATUS_NULL_POINTER = 5,
  SA_STATUS_BUFFER_TOO_SMALL = 6,
  SA_STATUS_PANIC = 7,
} SaStatus;

/**
 * Opaque sequence of converged branch points.
 */
typedef struct SaBranch SaBranch;

/**
 * Opaque Dirichlet solution on a perturbed planar annulus.
 */
typedef struct SaDirichlet SaDirichlet;

/**
 * Scalar summary of one branch point.
 */
typedef struct SaBranchPoint {
  double s;
  double lambda_s;
  double lambda_star;
  double residual_sup;
  double neumann_constant;
  double inner_dirichlet;
} SaBranchPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated description of a status code.
 */
const char *sa_status_message(enum SaStatus status);

/**
 * Inner Dirichlet value `a` and Neumann constant `c` of the radial solution.
 *
 * # Safety
 * `a` and `c` must be valid for writes.
 */
enum SaStatus sa_boundary_data(uint32_t n, double lambda, double *a, double *c);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum SaStatus sa_u_radial(uint32_t n, double lambda, double r, double *out);

/**
 * Symmetric mode matrix, row-major into `out[0..4]`.
 *
 * # Safety
 * `out` must point to 4 writable doubles.
 */
enum SaStatus sa_mode_matrix(uint32_t n, double lambda, double k, double *out);

/**
 * Eigenvalues `mu1 < mu2` of the mode matrix.
 *
 * # Safety
 * `mu1` and `mu2` must be valid for writes.
 */
enum SaStatus sa_eigen_closed_form(uint32_t n, double lambda, double k, double *mu1, double *mu2);

/**
 * Bifurcation value of the given degree.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SaStatus sa_find_lambda_star(uint32_t n, uint32_t degree, double tol, double *out);

/**
 * Solves with inner value `a_lambda`. `coeffs1`/`coeffs2` hold the
 * coefficients of `cos(2j theta)` for the inner and outer perturbation.
 *
 * # Safety
 * Coefficient pointers must be valid for `len1`/`len2` reads (or those
 * lengths zero); `out` must be valid for writes.
 */
enum SaStatus sa_dirichlet_solve(double lambda,
                                 const double *coeffs1,
                                 size_t len1,
                                 const double *coeffs2,
                                 size_t len2,
                                 size_t nr,
                                 size_t nt,
                                 struct SaDirichlet **out);

/**
 * Number of angular samples in each normal-derivative trace (0 for null).
 *
 * # Safety
 * `sol` must be null or a live handle.
 */
size_t sa_dirichlet_trace_len(const struct SaDirichlet *sol);

/**
 * Copies the normal-derivative trace on the inner (`outer == 0`) or outer
 * curve at `theta_i = 2 pi i / len`.
 *
 * # Safety
 * `sol` must be a live handle and `buf` valid for `len` writes.
 */
enum SaStatus sa_dirichlet_copy_trace(const struct SaDirichlet *sol,
                                      int outer,
                                      double *buf,
                                      size_t len);

/**
 * # Safety
 * `sol` must be null or a handle from `sa_dirichlet_solve`, freed once.
 */
void sa_dirichlet_free(struct SaDirichlet *sol);

/**
 * Continues the planar branch of the given even `mode` through the
 * amplitudes `s[0..count]`. On `SA_STATUS_NOT_CONVERGED` the handle is still
 * returned and holds the converged prefix. `modes = 0` and `tol <= 0`
 * select defaults.
 *
 * # Safety
 * `s` must be valid for `count` reads and `out` valid for writes.
 */
enum SaStatus sa_branch_continue(uint32_t mode,
                                 const double *s,
                                 size_t count,
                                 size_t nr,
                                 size_t nt,
                                 size_t modes,
                                 double tol,
                                 struct SaBranch **out);

/**
 * # Safety
 * `branch` must be null or a live handle.
 */
size_t sa_branch_len(const struct SaBranch *branch);

/**
 * # Safety
 * `branch` must be a live handle and `out` valid for writes.
 */
enum SaStatus sa_branch_point(const struct SaBranch *branch,
                              size_t index,
                              struct SaBranchPoint *out);

/**
 * # Safety
 * `branch` must be null or a handle from `sa_branch_continue`, freed once.
 */
void sa_branch_free(struct SaBranch *branch);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SERRIN_ANNULUS_H */
