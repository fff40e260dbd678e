#ifndef FOSLS_H
#define FOSLS_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Radial benchmark on `[-0.5, 0.5]²`.
 */
#define FOSLS_PROBLEM_BESSEL 0

/*
 `u = x + y` on the unit square.
 */
#define FOSLS_PROBLEM_POLYNOMIAL 1

/*
 Default DOF limit used when `FoslsProblem.max_dofs` is zero.
 */
#define FOSLS_DEFAULT_MAX_DOFS 500000

typedef enum {
  FOSLS_STATUS_OK = 0,
  FOSLS_STATUS_NULL_POINTER = 1,
  FOSLS_STATUS_INVALID_ARGUMENT = 2,
  FOSLS_STATUS_RESOURCE_CAP = 3,
  FOSLS_STATUS_SOLVER_FAILED = 4,
  FOSLS_STATUS_INTERNAL = 5,
  FOSLS_STATUS_PANIC = 6,
} FoslsStatus;

/*
 Opaque solved problem.
 */
typedef struct FoslsSolution FoslsSolution;

/*
 Problem description passed to [`fosls_solve`].
 */
typedef struct {
  /*
   `FOSLS_PROBLEM_BESSEL` or `FOSLS_PROBLEM_POLYNOMIAL`.
   */
  uint32_t kind;
  /*
   Wave number, positive.
   */
  double k;
  /*
   Polynomial order `p + 1`, 1 to 4.
   */
  size_t p_plus_1;
  /*
   Cells per side of the uniform mesh.
   */
  size_t n;
  /*
   Robin sign, `+1` or `-1`.
   */
  int32_t sigma;
  /*
   DOF limit; zero selects `FOSLS_DEFAULT_MAX_DOFS`.
   */
  size_t max_dofs;
} FoslsProblem;

/*
 Relative L² errors of a solution against the exact one.
 */
typedef struct {
  double rel_err_u;
  double rel_err_phi;
  double residual;
  double h;
  double kh_over_p;
  size_t ndof;
} FoslsErrors;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Assemble and solve `problem`. On success `*out` owns a new handle.

 # Safety
 `problem` must point to a valid `FoslsProblem`; `out` must be writable.
 */
FoslsStatus fosls_solve(const FoslsProblem *problem, FoslsSolution **out);

/*
 Release a handle from [`fosls_solve`]. Null is accepted.

 # Safety
 `solution` must be null or a handle not yet freed.
 */
void fosls_solution_free(FoslsSolution *solution);

/*
 Error norms measured when the problem was solved.

 # Safety
 Both pointers must be valid.
 */
FoslsStatus fosls_solution_errors(const FoslsSolution *solution, FoslsErrors *out);

/*
 `u_h(x, y)` as real and imaginary parts.

 # Safety
 All pointers must be valid.
 */
FoslsStatus fosls_solution_evaluate(const FoslsSolution *solution,
                                    double x,
                                    double y,
                                    double *re,
                                    double *im);

/*
 Copy the coefficient vector as interleaved `(re, im)` pairs.

 `len` is the capacity of `buf` in doubles and must be at least `2 * ndof`.
 Passing a null `buf` only reports the required length in `*needed`.

 # Safety
 `buf` must hold `len` doubles when non-null; `needed` must be valid.
 */
FoslsStatus fosls_solution_coefficients(const FoslsSolution *solution,
                                        double *buf,
                                        size_t len,
                                        size_t *needed);

/*
 Bessel function `J_0(x)`.

 # Safety
 `out` must be valid.
 */
FoslsStatus fosls_bessel_j0(double x, double *out);

/*
 Bessel function `J_1(x)`.

 # Safety
 `out` must be valid.
 */
FoslsStatus fosls_bessel_j1(double x, double *out);

/*
 Message for the last failure on this thread, or null. Valid until the next
 failing call on the same thread.
 */
const char *fosls_last_error(void);

/*
 Library version as a static string.
 */
const char *fosls_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOSLS_H */
