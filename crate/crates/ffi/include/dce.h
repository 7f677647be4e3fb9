#ifndef DCE_H
#define DCE_H

#include <stddef.h>

// Result codes. Zero is success.
typedef enum DceStatus {
  DCE_STATUS_OK = 0,
  DCE_STATUS_NULL_ARGUMENT = 1,
  DCE_STATUS_INVALID_UTF8 = 2,
  DCE_STATUS_INVALID_ARGUMENT = 3,
  DCE_STATUS_PARSE = 4,
  DCE_STATUS_CONFIG = 5,
  DCE_STATUS_ANALYSIS = 6,
  DCE_STATUS_PANIC = 7,
} DceStatus;

// A configured analysis pipeline.
typedef struct DcePipeline DcePipeline;

// A parsed source snippet.
typedef struct DceSnippet DceSnippet;

// Message of the last failed call on this thread, or NULL. The pointer is
// valid until the next call into this library on the same thread.
const char *dce_last_error(void);

// Library version as a static string.
const char *dce_version(void);

// Frees a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void dce_string_free(char *s);

// Parses `code` as `language` ("python" or "java").
//
// # Safety
// `code` and `language` are valid NUL-terminated strings; `out` is a valid
// pointer. On success `*out` owns a handle for [`dce_snippet_free`].
enum DceStatus dce_snippet_new(const char *code, const char *language, struct DceSnippet **out);

// # Safety
// `snippet` is NULL or a handle from [`dce_snippet_new`] not yet freed.
void dce_snippet_free(struct DceSnippet *snippet);

// Number of lines, or 0 for NULL.
//
// # Safety
// `snippet` is NULL or a live handle.
size_t dce_snippet_len(const struct DceSnippet *snippet);

// Static oracle findings as a JSON array of `{index, type, reason}`.
//
// # Safety
// `snippet` is a live handle and `out_json` a valid pointer.
enum DceStatus dce_oracle_findings_json(const struct DceSnippet *snippet, char **out_json);

// Per-line attribution with the built-in heuristic classifier and the
// selected candidates, as `{"scores": [...], "candidates": {...}}`.
//
// # Safety
// `snippet` is a live handle and `out_json` a valid pointer.
enum DceStatus dce_attribute_json(const struct DceSnippet *snippet,
                                  double tau,
                                  double epsilon,
                                  char **out_json);

// Builds a pipeline from TOML settings (NULL for defaults). The LLM
// endpoint and key are read from the environment, as for the CLI.
//
// # Safety
// `config_toml` is NULL or a valid string; `out` is a valid pointer. On
// success `*out` owns a handle for [`dce_pipeline_free`].
enum DceStatus dce_pipeline_new(const char *config_toml, struct DcePipeline **out);

// # Safety
// `pipeline` is NULL or a handle from [`dce_pipeline_new`] not yet freed.
void dce_pipeline_free(struct DcePipeline *pipeline);

// Runs the pipeline on one snippet and returns its report as JSON. Stage
// failures inside the run are listed in the report's `errors` and do not
// make this call fail.
//
// # Safety
// `pipeline` and `snippet` are live handles, `record_id` a valid string and
// `out_json` a valid pointer.
enum DceStatus dce_pipeline_analyze_json(const struct DcePipeline *pipeline,
                                         const char *record_id,
                                         const struct DceSnippet *snippet,
                                         char **out_json);

// Audits a proposed fix of `original`. `gold_json` is NULL or a JSON array
// of `{"index": n, "type": "unused" | "unreachable"}`.
//
// # Safety
// `original` is a live handle, `fixed` a valid string, `gold_json` NULL or
// a valid string, and `out_json` a valid pointer.
enum DceStatus dce_audit_json(const struct DceSnippet *original,
                              const char *fixed,
                              const char *gold_json,
                              char **out_json);

#endif  /* DCE_H */
