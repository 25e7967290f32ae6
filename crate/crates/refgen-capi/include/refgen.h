#ifndef REFGEN_H
#define REFGEN_H

/* Generated by cbindgen from refgen-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum RefgenStatus {
  // Success.
  REFGEN_STATUS_OK = 0,
  // A required pointer argument was null.
  REFGEN_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  REFGEN_STATUS_INVALID_UTF8 = 2,
  // A file could not be read or written.
  REFGEN_STATUS_IO = 3,
  // Input data failed to parse or validate.
  REFGEN_STATUS_PARSE = 4,
  // The operation failed on well-formed input (alignment, training, ...).
  REFGEN_STATUS_DATA = 5,
  // An internal invariant failed.
  REFGEN_STATUS_INTERNAL = 6,
} RefgenStatus;

// Opaque handle to a loaded corpus.
typedef struct RefgenCorpus RefgenCorpus;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread. The pointer is
// valid until the next API call on the same thread.
const char *refgen_last_error(void);

// Loads a corpus (JSONL) and optionally an entity registry (JSON).
// On success stores a handle in `out`; release it with
// [`refgen_corpus_free`].
//
// # Safety
// `corpus_path` must be a valid NUL-terminated path; `registry_path` may be
// null; `out` must point to writable storage for one pointer.
enum RefgenStatus refgen_corpus_load(const char *corpus_path,
                                     const char *registry_path,
                                     struct RefgenCorpus **out);

// Releases a corpus handle. Null is a no-op.
//
// # Safety
// `corpus` must be null or a pointer returned by [`refgen_corpus_load`]
// that has not been freed.
void refgen_corpus_free(struct RefgenCorpus *corpus);

// Number of documents, optionally restricted to one split
// (`"train"`/`"dev"`/`"test"`; null counts everything).
//
// # Safety
// `corpus` must be a live handle; `split` may be null; `out` must be
// writable.
enum RefgenStatus refgen_corpus_document_count(const struct RefgenCorpus *corpus,
                                               const char *split,
                                               size_t *out);

// Number of slots, optionally restricted to one split.
//
// # Safety
// As for [`refgen_corpus_document_count`].
enum RefgenStatus refgen_corpus_slot_count(const struct RefgenCorpus *corpus,
                                           const char *split,
                                           size_t *out);

// Character-level edit distance between two strings after lowercasing and
// whitespace normalization.
//
// # Safety
// `a` and `b` must be valid NUL-terminated strings; `out` must be writable.
enum RefgenStatus refgen_edit_distance(const char *a, const char *b, uint64_t *out);

// Trains a form model and writes it to `model_path`. `schema` is `"ml-s"`,
// `"ml-l"` or `"ml-l-wsj"`.
//
// # Safety
// `corpus` must be a live handle; `schema` and `model_path` must be valid
// strings.
enum RefgenStatus refgen_train_to_file(const struct RefgenCorpus *corpus,
                                       const char *schema,
                                       uint64_t seed,
                                       const char *model_path);

// Runs a generator over one split and writes predictions JSONL.
// `system` is `"rreg-s"`, `"rreg-l"`, `"ml-s"` or `"ml-l"`; the ML systems
// need `model_path` (may be null otherwise).
//
// # Safety
// `corpus` must be a live handle; `split`, `system` and `predictions_path`
// must be valid strings; `model_path` may be null.
enum RefgenStatus refgen_generate_to_file(const struct RefgenCorpus *corpus,
                                          const char *split,
                                          const char *system,
                                          const char *model_path,
                                          const char *predictions_path);

// Scores a predictions file against one split and returns the report as a
// JSON string in `out_json` (release with [`refgen_string_free`]).
// `token_level_sed` switches edit distance to token granularity;
// `bleu_smoothing` enables add-one BLEU smoothing.
//
// # Safety
// `corpus` must be a live handle; `split` and `predictions_path` must be
// valid strings; `out_json` must be writable.
enum RefgenStatus refgen_evaluate_to_json(const struct RefgenCorpus *corpus,
                                          const char *split,
                                          const char *predictions_path,
                                          int token_level_sed,
                                          int bleu_smoothing,
                                          char **out_json);

// Releases a string returned by this API. Null is a no-op.
//
// # Safety
// `s` must be null or a pointer returned by this API that has not been
// freed.
void refgen_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* REFGEN_H */
