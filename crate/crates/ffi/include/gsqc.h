#ifndef GSQC_H
#define GSQC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GsqcStatus {
  GSQC_STATUS_OK = 0,
  /**
   * Bound violation, non-factoring output or I/O failure.
   */
  GSQC_STATUS_FAILURE = 1,
  /**
   * Invalid program, option or argument domain.
   */
  GSQC_STATUS_VALIDATION = 2,
  /**
   * Eigensolver or numerical failure.
   */
  GSQC_STATUS_SOLVER = 3,
  /**
   * Development residual or input-recovery failure.
   */
  GSQC_STATUS_CONSISTENCY = 4,
  GSQC_STATUS_NULL_POINTER = 5,
  /**
   * A string argument was not UTF-8.
   */
  GSQC_STATUS_INVALID_STRING = 6,
  GSQC_STATUS_BUFFER_TOO_SMALL = 7,
  GSQC_STATUS_PANIC = 8,
} GsqcStatus;

/**
 * Opaque validated program.
 */
typedef struct GsqcProgram GsqcProgram;

/**
 * Opaque result of [`gsqc_run`].
 */
typedef struct GsqcRunResult GsqcRunResult;

/**
 * Scalar diagnostics of a run. `gap` is NaN when it was not resolved.
 */
typedef struct GsqcDiagnostics {
  double ground_energy;
  double gap;
  double residual;
  double fidelity;
  double p_all_final;
  uint64_t dimension;
  uint64_t matvecs;
} GsqcDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *gsqc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gsqc_version(void);

/**
 * Parses and validates a program document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum GsqcStatus gsqc_program_from_json(const char *json, struct GsqcProgram **out);

/**
 * Releases a program; NULL is ignored.
 *
 * # Safety
 * `program` must come from [`gsqc_program_from_json`] and not be used again.
 */
void gsqc_program_free(struct GsqcProgram *program);

/**
 * # Safety
 * `program` and `out` must be valid pointers.
 */
enum GsqcStatus gsqc_program_num_qubits(const struct GsqcProgram *program, size_t *out);

/**
 * Configuration-space dimension of the program.
 *
 * # Safety
 * `program` and `out` must be valid pointers.
 */
enum GsqcStatus gsqc_program_dimension(const struct GsqcProgram *program, uint64_t *out);

/**
 * Lowest `k` eigenvalues of the program's Hamiltonian.
 *
 * # Safety
 * `program` and `written` must be valid; `out` must hold `len` doubles.
 */
enum GsqcStatus gsqc_spectrum(const struct GsqcProgram *program,
                              size_t k,
                              double *out,
                              size_t len,
                              size_t *written);

/**
 * Solves a pinned program and checks it against the circuit.
 *
 * # Safety
 * `program` and `out` must be valid pointers.
 */
enum GsqcStatus gsqc_run(const struct GsqcProgram *program, struct GsqcRunResult **out);

/**
 * Releases a run result; NULL is ignored.
 *
 * # Safety
 * `result` must come from [`gsqc_run`] and not be used again.
 */
void gsqc_run_result_free(struct GsqcRunResult *result);

/**
 * # Safety
 * `result` and `out` must be valid pointers.
 */
enum GsqcStatus gsqc_run_result_diagnostics(const struct GsqcRunResult *result,
                                            struct GsqcDiagnostics *out);

/**
 * Output amplitudes, `2^M` of them, indexed with qubit 0 as the most
 * significant bit. Real and imaginary parts go to separate buffers.
 *
 * # Safety
 * `re` and `im` must each hold `len` doubles; `written` must be valid.
 */
enum GsqcStatus gsqc_run_result_output(const struct GsqcRunResult *result,
                                       double *re,
                                       double *im,
                                       size_t len,
                                       size_t *written);

/**
 * Single-qubit characteristic polynomial `det(H - E)` with tipping `beta`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum GsqcStatus gsqc_char_det(double energy,
                              size_t num_steps,
                              double epsilon,
                              double beta,
                              double *out);

/**
 * The `2(N+1)` exact single-qubit levels, ascending.
 *
 * # Safety
 * `out` must hold `len` doubles; `written` must be valid.
 */
enum GsqcStatus gsqc_analytic_levels(size_t num_steps,
                                     double epsilon,
                                     double *out,
                                     size_t len,
                                     size_t *written);

/**
 * `1/sqrt(MN)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum GsqcStatus gsqc_choose_beta(size_t num_qubits, size_t num_steps, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSQC_H */
