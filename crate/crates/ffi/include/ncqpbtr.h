#ifndef NCQPBTR_H
#define NCQPBTR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call. Values 2 to 6 match the command-line exit
// codes.
typedef enum NcqpStatus {
  NCQP_STATUS_OK = 0,
  // `ncqp_problem_check`: valid, but convexity of psi is not certified.
  NCQP_STATUS_CONVEXITY_UNKNOWN = 1,
  NCQP_STATUS_PARSE = 2,
  // Infeasible domain, bad bounds or parameters, non-finite data, or a
  // dimension mismatch.
  NCQP_STATUS_INVALID_PROBLEM = 3,
  NCQP_STATUS_NUMERICAL = 4,
  NCQP_STATUS_ENTRY_CONDITION = 5,
  NCQP_STATUS_DIMENSION_TOO_LARGE = 6,
  NCQP_STATUS_NULL_POINTER = 10,
  NCQP_STATUS_INVALID_ARGUMENT = 11,
  NCQP_STATUS_PANIC = 12,
} NcqpStatus;

typedef struct NcqpProblem NcqpProblem;

typedef struct NcqpSolution NcqpSolution;

typedef struct NcqpGenParams {
  size_t n;
  uint64_t seed;
  double q_min_eig;
  double box_scale;
  double delta;
  double tau_f;
  double pi_f;
  double tightness;
} NcqpGenParams;

typedef struct NcqpCheckReport {
  double shortest_side;
  // 1 if convexity of psi is certified, 0 otherwise.
  int psi_certified;
  double barrier_weight;
  double tau0;
  double phase1_eps;
  double problem_size;
} NcqpCheckReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread. Valid until the next call
// into this library from the same thread; never NULL.
const char *ncqp_last_error(void);

// Library version, a static NUL-terminated string.
const char *ncqp_version(void);

// Builds a problem from dense arrays (`q` row-major `n*n`, the others of
// length `n`). The problem is validated, so an infeasible domain is
// reported here.
enum NcqpStatus ncqp_problem_new(size_t n,
                                 const double *q,
                                 const double *c,
                                 const double *x_lower,
                                 const double *x_upper,
                                 double delta,
                                 double tau_f,
                                 double pi_f,
                                 struct NcqpProblem **out);

// Parses a problem file (JSON text).
enum NcqpStatus ncqp_problem_from_json(const char *json, struct NcqpProblem **out);

// Generator defaults for dimension `n` and `seed`.
struct NcqpGenParams ncqp_gen_params_default(size_t n, uint64_t seed);

// Deterministic random instance.
enum NcqpStatus ncqp_problem_generate(const struct NcqpGenParams *params, struct NcqpProblem **out);

// Dimension of `problem`, or 0 if it is NULL.
size_t ncqp_problem_dim(const struct NcqpProblem *problem);

// Serializes `problem` as a problem file.
enum NcqpStatus ncqp_problem_to_json(const struct NcqpProblem *problem, char **out);

// Fills `report` and returns `Ok` if convexity of psi is certified,
// `ConvexityUnknown` if not. `tol` enters only the problem size.
enum NcqpStatus ncqp_problem_check(const struct NcqpProblem *problem,
                                   double tol,
                                   struct NcqpCheckReport *report);

// The objective at `x` (length `len`, which must equal the dimension);
// `+inf` outside the domain.
enum NcqpStatus ncqp_problem_phi(const struct NcqpProblem *problem,
                                 const double *x,
                                 size_t len,
                                 double *out);

// Releases a problem. NULL is ignored.
void ncqp_problem_free(struct NcqpProblem *problem);

// Solves to accuracy `tol`. `threads` caps phase-1 parallelism (0 means 1);
// the result does not depend on it.
enum NcqpStatus ncqp_solve(const struct NcqpProblem *problem,
                           double tol,
                           size_t threads,
                           struct NcqpSolution **out);

// Dimension of the solution vector, or 0 if `solution` is NULL.
size_t ncqp_solution_dim(const struct NcqpSolution *solution);

// Copies the solution into `x`, which must hold exactly the dimension.
enum NcqpStatus ncqp_solution_x(const struct NcqpSolution *solution, double *x, size_t len);

// Objective value at the solution; NaN if `solution` is NULL.
double ncqp_solution_phi(const struct NcqpSolution *solution);

// Guaranteed bound on the optimality gap; NaN if `solution` is NULL.
double ncqp_solution_certified_gap(const struct NcqpSolution *solution);

// Cholesky solves in the two path-following phases.
size_t ncqp_solution_linear_solves(const struct NcqpSolution *solution);

// Number of warnings raised while solving.
size_t ncqp_solution_warning_count(const struct NcqpSolution *solution);

// The full solution file (JSON), identical to what the command line writes.
enum NcqpStatus ncqp_solution_to_json(const struct NcqpSolution *solution, char **out);

// Releases a solution. NULL is ignored.
void ncqp_solution_free(struct NcqpSolution *solution);

// Releases a string returned by this library. NULL is ignored.
void ncqp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NCQPBTR_H */
