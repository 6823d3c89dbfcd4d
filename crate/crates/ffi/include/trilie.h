#ifndef TRILIE_H
#define TRILIE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Growth classification returned by [`trilie_growth_scan`].
 */
typedef enum TrilieGrowth {
  TRILIE_GROWTH_POLYNOMIAL = 0,
  TRILIE_GROWTH_EXPONENTIAL = 1,
  TRILIE_GROWTH_INCONCLUSIVE = 2,
} TrilieGrowth;

/**
 * Result of every fallible call.
 */
typedef enum TrilieStatus {
  TRILIE_STATUS_OK = 0,
  TRILIE_STATUS_NULL_POINTER = 1,
  TRILIE_STATUS_INVALID_UTF8 = 2,
  TRILIE_STATUS_INVALID_INPUT = 3,
  TRILIE_STATUS_NOT_TRIANGULAR = 4,
  TRILIE_STATUS_ALGEBRA_MISMATCH = 5,
  TRILIE_STATUS_NUMERIC = 6,
  TRILIE_STATUS_PANIC = 7,
} TrilieStatus;

/**
 * Lie algebra with its PBW ordering.
 */
typedef struct TrilieAlgebra TrilieAlgebra;

/**
 * Element of the enveloping algebra in PBW normal form.
 */
typedef struct TrilieElement TrilieElement;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next call.
 */
const char *trilie_last_error(void);

/**
 * Parses an algebra from its JSON description.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum TrilieStatus trilie_algebra_from_json(const char *json, struct TrilieAlgebra **out);

/**
 * Algebra by catalog name (`af1`, `heisenberg`, `e2`, `tri:3`, ...).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable pointer.
 */
enum TrilieStatus trilie_algebra_from_catalog(const char *name, struct TrilieAlgebra **out);

/**
 * # Safety
 * `alg` must be NULL or a handle from this library that has not been freed.
 */
void trilie_algebra_free(struct TrilieAlgebra *alg);

/**
 * Dimension of the algebra; 0 for NULL.
 *
 * # Safety
 * `alg` must be NULL or a live handle.
 */
size_t trilie_algebra_dim(const struct TrilieAlgebra *alg);

/**
 * Writes whether the algebra is triangular; on `NotTriangular` the message names the witness.
 *
 * # Safety
 * `alg` must be a live handle and `out` a writable pointer.
 */
enum TrilieStatus trilie_algebra_is_triangular(const struct TrilieAlgebra *alg, bool *out);

/**
 * Parses an element such as `3/2*e1^2*e3 - e2`; words are straightened.
 *
 * # Safety
 * `alg` must be a live handle, `text` a NUL-terminated string and `out` writable.
 */
enum TrilieStatus trilie_element_parse(const struct TrilieAlgebra *alg,
                                       const char *text,
                                       struct TrilieElement **out);

/**
 * Product `lhs * rhs` in PBW normal form.
 *
 * # Safety
 * `lhs`, `rhs` must be live handles over the same algebra; `out` writable.
 */
enum TrilieStatus trilie_element_mul(const struct TrilieElement *lhs,
                                     const struct TrilieElement *rhs,
                                     struct TrilieElement **out);

/**
 * Text form of the element; release with [`trilie_string_free`]. NULL on a NULL handle.
 *
 * # Safety
 * `e` must be NULL or a live handle.
 */
char *trilie_element_to_string(const struct TrilieElement *e);

/**
 * # Safety
 * `e` must be NULL or a handle from this library that has not been freed.
 */
void trilie_element_free(struct TrilieElement *e);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library that has not been freed.
 */
void trilie_string_free(char *s);

/**
 * Growth scan of `||exp(isb)||` for a row-major `n x n` matrix.
 *
 * # Safety
 * `entries` must point to `n * n` doubles; `alpha` and `verdict` must be writable.
 */
enum TrilieStatus trilie_growth_scan(const double *entries,
                                     size_t n,
                                     double s_max,
                                     double *alpha,
                                     enum TrilieGrowth *verdict);

/**
 * Runs the command line with `args_json` (a JSON array of strings, without the program name).
 * Writes the exit code and the combined output, to be released with [`trilie_string_free`].
 *
 * # Safety
 * `args_json` must be a NUL-terminated string; `code` and `output` must be writable.
 */
enum TrilieStatus trilie_cli_run(const char *args_json, int32_t *code, char **output);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRILIE_H */
