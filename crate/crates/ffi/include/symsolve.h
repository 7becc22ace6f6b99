#ifndef SYMSOLVE_H
#define SYMSOLVE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum SymsolveStatus {
  SymsolveStatus_Ok = 0,
  /**
   * A required pointer was null or an argument was out of range.
   */
  SymsolveStatus_InvalidArgument = 1,
  /**
   * Input was not valid UTF-8.
   */
  SymsolveStatus_InvalidUtf8 = 2,
  /**
   * Input failed to parse (JSON, answer text, model file).
   */
  SymsolveStatus_ParseError = 3,
  /**
   * Internal failure; see `symsolve_last_error_message`.
   */
  SymsolveStatus_Internal = 4,
} SymsolveStatus;

/**
 * Opaque trained switch model.
 */
typedef struct SymsolveSwitchModel SymsolveSwitchModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread; do not free.
 */
const char *symsolve_last_error_message(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `ptr` must be a pointer previously returned by a `symsolve_*` function
 * that documents string ownership transfer, and not yet freed.
 */
void symsolve_string_free(char *ptr);

/**
 * Statically analyze guest source: syntax, triviality, placeholders,
 * example usage, raw-media imports. Writes a JSON issue report to `out`
 * (caller frees with `symsolve_string_free`).
 *
 * # Safety
 * `source` must point to a NUL-terminated string; `out` must be valid for
 * writes.
 */
enum SymsolveStatus symsolve_analyze_source(const char *source, char **out);

/**
 * Extract fenced blocks from model output as a JSON array of
 * `{"tag", "body"}` objects (caller frees `out`).
 *
 * # Safety
 * `text` must point to a NUL-terminated string; `out` must be valid for
 * writes.
 */
enum SymsolveStatus symsolve_parse_fenced_blocks(const char *text, char **out);

/**
 * Harmonic mean of `len` fractions; `shift` is added to every value first
 * (pass 0.0 for the plain mean, 0.01 for benchmark-table aggregation).
 *
 * # Safety
 * `values` must point to `len` f64s; `out` must be valid for writes.
 */
enum SymsolveStatus symsolve_harmonic_mean(const double *values,
                                           uintptr_t len,
                                           double shift,
                                           double *out);

/**
 * Normalize an answer under a kind ("free_text" | "integer" | "decimal" |
 * "boolean"); writes the canonical text to `out` (caller frees).
 *
 * # Safety
 * `raw` and `kind` must point to NUL-terminated strings; `out` must be
 * valid for writes.
 */
enum SymsolveStatus symsolve_normalize_answer(const char *raw, const char *kind, char **out);

/**
 * Whether two raw answers match under a kind; writes 1 or 0 to `out`.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be valid for writes.
 */
enum SymsolveStatus symsolve_answers_match(const char *predicted,
                                           const char *gold,
                                           const char *kind,
                                           int32_t *out);

/**
 * Load a switch model from its JSON document; returns a handle or null on
 * failure (see `symsolve_last_error_message`). Free with
 * [`symsolve_switch_model_free`].
 *
 * # Safety
 * `json` must point to a NUL-terminated string.
 */
struct SymsolveSwitchModel *symsolve_switch_model_from_json(const char *json);

/**
 * Routing decision for ten criteria scores: writes the synthesis
 * probability and 1 (synthesis) or 0 (chain of thought).
 *
 * # Safety
 * `model` must be a live handle from `symsolve_switch_model_from_json`;
 * `scores` must point to `len` f64s; output pointers must be writable.
 */
enum SymsolveStatus symsolve_switch_model_decide(const struct SymsolveSwitchModel *model,
                                                 const double *scores,
                                                 uintptr_t len,
                                                 double *out_probability,
                                                 int32_t *out_synthesis);

/**
 * Release a switch model handle.
 *
 * # Safety
 * `model` must be a handle from `symsolve_switch_model_from_json`, not yet
 * freed.
 */
void symsolve_switch_model_free(struct SymsolveSwitchModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMSOLVE_H */
