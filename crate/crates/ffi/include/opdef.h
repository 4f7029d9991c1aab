#ifndef OPDEF_H
#define OPDEF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum OpdefStatus {
  OPDEF_STATUS_OK = 0,
  OPDEF_STATUS_NULL_POINTER = 1,
  OPDEF_STATUS_INVALID_UTF8 = 2,
  OPDEF_STATUS_INVALID_SPEC = 3,
  OPDEF_STATUS_INVALID_ARGUMENT = 4,
  OPDEF_STATUS_NUMERICAL = 5,
  OPDEF_STATUS_BUFFER_TOO_SMALL = 6,
  OPDEF_STATUS_NOT_AVAILABLE = 7,
  OPDEF_STATUS_PANIC = 8,
} OpdefStatus;

/**
 * Verdict kinds, numbered like the CLI exit codes.
 */
typedef enum OpdefVerdictKind {
  OPDEF_VERDICT_KIND_DEFINABLE = 0,
  OPDEF_VERDICT_KIND_NOT_DEFINABLE = 1,
  OPDEF_VERDICT_KIND_INCONCLUSIVE = 2,
} OpdefVerdictKind;

/**
 * Opaque operator handle.
 */
typedef struct OpdefOperator OpdefOperator;

/**
 * Opaque classification result.
 */
typedef struct OpdefVerdict OpdefVerdict;

/**
 * Classification options.
 */
typedef struct OpdefOptions {
  double cert_tol;
  double weyl_tol;
  double rank_threshold;
  size_t n_max;
  size_t rank_budget;
  uint64_t seed;
} OpdefOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or an empty string.
 * The pointer stays valid until the next library call on this thread.
 */
const char *opdef_last_error_message(void);

/**
 * Defaults used by the command-line tool.
 */
struct OpdefOptions opdef_options_default(void);

/**
 * Parses a NUL-terminated operator spec in JSON.
 *
 * # Safety
 * `json` must be a valid C string and `out` a writable pointer.
 */
enum OpdefStatus opdef_operator_from_json(const char *json, struct OpdefOperator **out);

/**
 * Releases an operator. Null is ignored.
 *
 * # Safety
 * `op` must come from this library and not be used afterwards.
 */
void opdef_operator_free(struct OpdefOperator *op);

/**
 * Writes whether the operator acts on complex l2.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum OpdefStatus opdef_operator_is_complex(const struct OpdefOperator *op, bool *out);

/**
 * Upper bound on the operator norm.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum OpdefStatus opdef_operator_norm_bound(const struct OpdefOperator *op, double *out);

/**
 * Applies the operator to the finitely supported vector `re + i im` of
 * length `len`. `im` may be null for real input. The image is written to
 * `out_re` and, when not null, `out_im`; `written` receives its length.
 * If `out_len` is too short nothing is written except `written`, and
 * `OPDEF_STATUS_BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * Input arrays must hold `len` values, output arrays `out_len` values.
 */
enum OpdefStatus opdef_operator_apply(const struct OpdefOperator *op,
                                      const double *re,
                                      const double *im,
                                      size_t len,
                                      double *out_re,
                                      double *out_im,
                                      size_t out_len,
                                      size_t *written);

/**
 * Writes the `n x n` finite section `<T e_j, e_i>` in row-major order to
 * `out_re` and, when not null, `out_im`.
 *
 * # Safety
 * Output arrays must hold `n * n` values.
 */
enum OpdefStatus opdef_operator_truncate(const struct OpdefOperator *op,
                                         size_t n,
                                         double *out_re,
                                         double *out_im);

/**
 * Classifies the operator. `options` may be null for the defaults.
 *
 * # Safety
 * `op` must be a live handle, `options` null or readable, `out` writable.
 */
enum OpdefStatus opdef_classify(const struct OpdefOperator *op,
                                const struct OpdefOptions *options,
                                struct OpdefVerdict **out);

/**
 * Releases a verdict. Null is ignored.
 *
 * # Safety
 * `v` must come from this library and not be used afterwards.
 */
void opdef_verdict_free(struct OpdefVerdict *v);

/**
 * # Safety
 * `v` must be a live handle and `out` writable.
 */
enum OpdefStatus opdef_verdict_kind(const struct OpdefVerdict *v, enum OpdefVerdictKind *out);

/**
 * The scalar `lambda` of a definable verdict; `OPDEF_STATUS_NOT_AVAILABLE`
 * otherwise.
 *
 * # Safety
 * `v` must be a live handle and `re`, `im` writable.
 */
enum OpdefStatus opdef_verdict_lambda(const struct OpdefVerdict *v, double *re, double *im);

/**
 * The verdict as a JSON report, released with `opdef_string_free`.
 *
 * # Safety
 * `v` must be a live handle and `out` writable.
 */
enum OpdefStatus opdef_verdict_to_json(const struct OpdefVerdict *v, char **out);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void opdef_string_free(char *s);

/**
 * Kernel and cokernel dimensions at truncation `n`, checked against `2n`.
 * Any output pointer may be null.
 *
 * # Safety
 * `op` must be a live handle; non-null outputs must be writable.
 */
enum OpdefStatus opdef_fredholm_index(const struct OpdefOperator *op,
                                      double threshold,
                                      size_t n,
                                      size_t *kernel_dim,
                                      size_t *cokernel_dim,
                                      int64_t *index);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPDEF_H */
