#ifndef REVCUE_H
#define REVCUE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum revcue_status {
  REVCUE_STATUS_OK = 0,
  /**
   * Null pointer, malformed UTF-8 or an invalid setting.
   */
  REVCUE_STATUS_INVALID_ARGUMENT = 1,
  REVCUE_STATUS_CORPUS_QUALITY = 2,
  REVCUE_STATUS_IO = 3,
  REVCUE_STATUS_NETWORK = 4,
  /**
   * Lexicon file could not be parsed.
   */
  REVCUE_STATUS_LEXICON = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  REVCUE_STATUS_PANIC = 6,
} revcue_status;

/**
 * Incremental collocation counter for one project.
 */
typedef struct revcue_collocator revcue_collocator;

/**
 * Cue lexicon handle.
 */
typedef struct revcue_lexicon revcue_lexicon;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next revcue call on the same thread.
 */
const char *revcue_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void revcue_string_free(char *s);

/**
 * The bundled lexicon. Never null.
 */
struct revcue_lexicon *revcue_lexicon_default(void);

/**
 * Loads a `phrase<TAB>category` lexicon file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum revcue_status revcue_lexicon_load(const char *path, struct revcue_lexicon **out);

/**
 * # Safety
 * `lexicon` must come from this library and not have been freed.
 */
void revcue_lexicon_free(struct revcue_lexicon *lexicon);

/**
 * Number of cue phrases, or 0 for a null handle.
 *
 * # Safety
 * `lexicon` must be null or a live handle.
 */
size_t revcue_lexicon_len(const struct revcue_lexicon *lexicon);

/**
 * Writes the lexicon version string to `out`.
 *
 * # Safety
 * `lexicon` must be a live handle and `out` a writable pointer.
 */
enum revcue_status revcue_lexicon_version(const struct revcue_lexicon *lexicon, char **out);

/**
 * Looks up a cue phrase. `out_category` receives the category index
 * (0 Causality, 1 Contrast, 2 Exemplification, 3 Clarification,
 * 4 Similarity, 5 Hypothesis) or -1 when the phrase is not a cue.
 *
 * # Safety
 * `lexicon` must be a live handle, `phrase` a NUL-terminated string and
 * `out_category` a writable pointer.
 */
enum revcue_status revcue_lexicon_lookup(const struct revcue_lexicon *lexicon,
                                         const char *phrase,
                                         int32_t *out_category);

/**
 * Lints one comment and writes the report as JSON to `out_json`.
 * `config_toml` may be null for the default linter settings.
 *
 * # Safety
 * Pointers must be live; strings NUL-terminated; `out_json` writable.
 */
enum revcue_status revcue_lint_json(const struct revcue_lexicon *lexicon,
                                    const char *comment_id,
                                    const char *text,
                                    const char *config_toml,
                                    char **out_json);

/**
 * Preprocesses a comment and writes its token array as JSON to `out_json`.
 * `config_toml` may be null for the defaults.
 *
 * # Safety
 * `text` must be NUL-terminated and `out_json` writable.
 */
enum revcue_status revcue_preprocess_json(const char *text,
                                          const char *config_toml,
                                          char **out_json);

/**
 * Starts counting code collocations for `project` with the given window
 * distance and the default exclusions.
 *
 * # Safety
 * `project` must be NUL-terminated and `out` writable.
 */
enum revcue_status revcue_collocator_new(const char *project,
                                         size_t window,
                                         struct revcue_collocator **out);

/**
 * Adds one raw comment to the counts.
 *
 * # Safety
 * `collocator` must be a live handle and `text` NUL-terminated.
 */
enum revcue_status revcue_collocator_add(struct revcue_collocator *collocator,
                                         const char *comment_id,
                                         const char *text);

/**
 * Writes the ranked words with at least `min_frequency` pairs as JSON.
 *
 * # Safety
 * `collocator` must be a live handle and `out_json` writable.
 */
enum revcue_status revcue_collocator_ranked_json(const struct revcue_collocator *collocator,
                                                 uint64_t min_frequency,
                                                 char **out_json);

/**
 * Writes the full count table as JSON.
 *
 * # Safety
 * `collocator` must be a live handle and `out_json` writable.
 */
enum revcue_status revcue_collocator_table_json(const struct revcue_collocator *collocator,
                                                char **out_json);

/**
 * # Safety
 * `collocator` must come from this library and not have been freed.
 */
void revcue_collocator_free(struct revcue_collocator *collocator);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REVCUE_H */
