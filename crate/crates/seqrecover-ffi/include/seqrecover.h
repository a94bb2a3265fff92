/* C bindings for the seqrecover library. */

#ifndef SEQRECOVER_H
#define SEQRECOVER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code for every fallible call.
 */
typedef enum SeqrecStatus {
  SEQREC_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  SEQREC_STATUS_NULL_POINTER = 1,
  /**
   * An input string was not valid UTF-8.
   */
  SEQREC_STATUS_INVALID_UTF8 = 2,
  /**
   * A sequence or number failed to parse.
   */
  SEQREC_STATUS_PARSE_ERROR = 3,
  /**
   * An argument was outside its domain (unknown kind, bad n, ...).
   */
  SEQREC_STATUS_INVALID_ARGUMENT = 4,
  /**
   * The oracle rejected the call (alphabet, cap, mode, domain).
   */
  SEQREC_STATUS_ORACLE_ERROR = 5,
  /**
   * A recovery strategy failed (adversarial answers, unknown id, ...).
   */
  SEQREC_STATUS_RECOVERY_ERROR = 6,
  /**
   * Internal panic; a bug.
   */
  SEQREC_STATUS_INTERNAL_ERROR = 7,
} SeqrecStatus;

/**
 * Opaque oracle session handle.
 */
typedef struct SeqrecOracle SeqrecOracle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the most recent error message on this thread into a new string,
 * or returns NULL if there was none.
 */
char *seqrec_last_error(void);

/**
 * Frees a string allocated by this library.
 *
 * # Safety
 * `s` must have been returned by a `seqrec_*` call and not freed before.
 */
void seqrec_string_free(char *s);

/**
 * Exact distance between two sequences. `kind` is "edit", "dtw", or
 * "frechet"; `p` is the p-norm exponent for "dtw" (use 1 otherwise). The
 * result is written as a decimal integer or reduced fraction "p/q".
 *
 * # Safety
 * `kind`, `x`, `y` must be valid NUL-terminated strings; `out` must be a
 * valid pointer.
 */
enum SeqrecStatus seqrec_distance(const char *kind,
                                  uint32_t p,
                                  const char *x,
                                  const char *y,
                                  char **out);

/**
 * Creates an oracle session over a hidden binary sequence of length at
 * most `n`. `adaptive` selects incremental queries vs a one-shot plan.
 *
 * # Safety
 * String arguments must be valid NUL-terminated strings; `out` must be a
 * valid pointer. Free the handle with `seqrec_oracle_free`.
 */
enum SeqrecStatus seqrec_oracle_new(const char *kind,
                                    uint32_t p,
                                    const char *hidden,
                                    uintptr_t n,
                                    bool adaptive,
                                    struct SeqrecOracle **out);

/**
 * Answers one query on an adaptive session; the answer is written as a
 * decimal integer or reduced fraction.
 *
 * # Safety
 * `oracle` must be a live handle from `seqrec_oracle_new`; `q` must be a
 * valid NUL-terminated string; `out` must be a valid pointer.
 */
enum SeqrecStatus seqrec_oracle_query(struct SeqrecOracle *oracle, const char *q, char **out);

/**
 * Number of answered queries so far; 0 for a NULL handle.
 *
 * # Safety
 * `oracle` must be NULL or a live handle.
 */
uintptr_t seqrec_oracle_query_count(const struct SeqrecOracle *oracle);

/**
 * Releases an oracle handle.
 *
 * # Safety
 * `oracle` must be NULL or a handle from `seqrec_oracle_new`, not yet
 * freed.
 */
void seqrec_oracle_free(struct SeqrecOracle *oracle);

/**
 * Runs a registered recovery strategy against a hidden input and writes
 * the full report as JSON: recovered sequence, query count, declared
 * bound, bound flag, and recovery level.
 *
 * # Safety
 * String arguments must be valid NUL-terminated strings; `out_json` must
 * be a valid pointer.
 */
enum SeqrecStatus seqrec_recover(const char *strategy,
                                 const char *hidden,
                                 uintptr_t n,
                                 char **out_json);

/**
 * Writes the registered strategy ids as a JSON array of strings.
 *
 * # Safety
 * `out_json` must be a valid pointer.
 */
enum SeqrecStatus seqrec_strategy_ids(char **out_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SEQRECOVER_H */
