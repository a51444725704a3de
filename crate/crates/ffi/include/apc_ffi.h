#ifndef APC_FFI_H
#define APC_FFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ApcStatus {
  APC_STATUS_OK = 0,
  APC_STATUS_NULL_POINTER = 1,
  APC_STATUS_INVALID_ARGUMENT = 2,
  // Bad input data: dimensions, rank, inconsistency, I/O.
  APC_STATUS_DATA_ERROR = 3,
  // Tuning or spectral failure.
  APC_STATUS_NUMERICAL_ERROR = 4,
  // The run diverged; the partial trace is still returned.
  APC_STATUS_DIVERGED = 5,
  APC_STATUS_PANIC = 6,
} ApcStatus;

typedef enum ApcMethod {
  APC_METHOD_APC = 0,
  APC_METHOD_DGD = 1,
  APC_METHOD_DNAG = 2,
  APC_METHOD_DHBM = 3,
  APC_METHOD_ADMM = 4,
  APC_METHOD_CIMMINO = 5,
  APC_METHOD_PDHBM = 6,
  APC_METHOD_CONSENSUS = 7,
} ApcMethod;

// A row-partitioned system.
typedef struct ApcSystem ApcSystem;

// Result of one solver run.
typedef struct ApcTrace ApcTrace;

// Method parameters. Fields a method does not use are NaN.
typedef struct ApcParams {
  enum ApcMethod method;
  double gamma;
  double eta;
  double alpha;
  double beta;
  double xi;
  double nu;
  // Predicted contraction factor; output only.
  double rho;
  // Predicted convergence time; output only.
  double t_predicted;
} ApcParams;

typedef struct ApcTraceSummary {
  // Completed rounds.
  size_t rounds;
  bool converged;
  double final_error;
  // NaN when the trace is too short to fit.
  double fitted_rate;
  double t_empirical;
  double t_predicted;
} ApcTraceSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or NULL. Valid until the next
// call into this library from the same thread.
const char *apc_last_error(void);

// Library version as a static NUL-terminated string.
const char *apc_version(void);

// Builds a system from a row-major `rows x cols` matrix, its right-hand side
// and an optional known solution (`x_star` may be NULL), split into `m`
// equal blocks.
//
// # Safety
// `a` must point to `rows * cols` values, `b` to `rows` values and `x_star`,
// when not NULL, to `cols` values. `out` must be writable.
enum ApcStatus apc_system_new(size_t rows,
                              size_t cols,
                              const double *a,
                              const double *b,
                              const double *x_star,
                              size_t m,
                              struct ApcSystem **out);

// Builds the seeded Gaussian system `n` unknowns by `rows` equations with
// entries of the given mean, split into `m` blocks.
//
// # Safety
// `out` must be writable.
enum ApcStatus apc_system_synth(size_t n,
                                size_t rows,
                                double mean,
                                uint64_t seed,
                                size_t m,
                                struct ApcSystem **out);

// # Safety
// `sys` must come from this library and not be used afterwards. NULL is a no-op.
void apc_system_free(struct ApcSystem *sys);

// Unknowns, equations and blocks of `sys`. Any output pointer may be NULL.
//
// # Safety
// `sys` must be a live handle.
enum ApcStatus apc_system_dims(const struct ApcSystem *sys, size_t *n, size_t *rows, size_t *m);

// Optimal parameters of `method` for `sys`.
//
// # Safety
// `sys` must be a live handle and `out` writable.
enum ApcStatus apc_optimal_params(const struct ApcSystem *sys,
                                  enum ApcMethod method,
                                  struct ApcParams *out);

// Runs `params.method` with the given parameters.
//
// `max_iters == 0` sizes the budget from the predicted convergence time; a
// negative `tol` selects the default of 1e-10. With `simulate` set the run
// goes through the threaded master/worker simulation. On `APC_STATUS_DIVERGED`
// `out` still receives the partial trace.
//
// # Safety
// `sys` must be a live handle, `params` readable and `out` writable.
enum ApcStatus apc_solve(const struct ApcSystem *sys,
                         const struct ApcParams *params,
                         size_t max_iters,
                         double tol,
                         bool simulate,
                         struct ApcTrace **out);

// # Safety
// `trace` must come from this library and not be used afterwards. NULL is a no-op.
void apc_trace_free(struct ApcTrace *trace);

// # Safety
// `trace` must be a live handle and `out` writable.
enum ApcStatus apc_trace_summary(const struct ApcTrace *trace, struct ApcTraceSummary *out);

// Copies the relative errors, starting with the initial one, into `buf`.
// `len` receives the full length (`rounds + 1`); at most `cap` values are
// written, so a NULL `buf` with `cap == 0` queries the size.
//
// # Safety
// `trace` must be a live handle, `buf` writable for `cap` values and `len` writable.
enum ApcStatus apc_trace_errors(const struct ApcTrace *trace, double *buf, size_t cap, size_t *len);

// Copies the final master estimate; sizing works as in [`apc_trace_errors`].
//
// # Safety
// As for [`apc_trace_errors`].
enum ApcStatus apc_trace_solution(const struct ApcTrace *trace,
                                  double *buf,
                                  size_t cap,
                                  size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APC_FFI_H */
