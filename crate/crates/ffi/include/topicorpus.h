#ifndef TOPICORPUS_H
#define TOPICORPUS_H

#include <stdbool.h>
#include <stdint.h>
#include <stddef.h>

typedef enum {
  TC_STATUS_OK = 0,
  TC_STATUS_NULL_POINTER = 1,
  TC_STATUS_INVALID_UTF8 = 2,
  TC_STATUS_INVALID_ARGUMENT = 3,
  TC_STATUS_IO = 4,
  TC_STATUS_PARSE = 5,
  /*
   The dump reader has no more records.
   */
  TC_STATUS_END_OF_STREAM = 6,
  TC_STATUS_PANIC = 7,
} TcStatus;

typedef enum {
  TC_RECORD_KIND_SUBMISSION = 0,
  TC_RECORD_KIND_COMMENT = 1,
} TcRecordKind;

/*
 Streaming reader over one dump file.
 */
typedef struct TcDumpReader TcDumpReader;

/*
 Keyword matcher over submission titles.
 */
typedef struct TcMatcher TcMatcher;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or NULL. Do not free.
 */
const char *tc_last_error_message(void);

/*
 Release a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void tc_string_free(char *s);

/*
 Build a matcher from a JSON array of keywords.

 # Safety
 `keywords_json` must be a NUL-terminated string; `out` must be writable.
 */
TcStatus tc_matcher_new(const char *keywords_json, TcMatcher **out);

/*
 Whether any keyword occurs in `title` as a contiguous token run.

 # Safety
 `matcher` must be a live handle; `title` NUL-terminated; `out` writable.
 */
TcStatus tc_matcher_is_match(const TcMatcher *matcher, const char *title, bool *out);

/*
 # Safety
 `matcher` must come from [`tc_matcher_new`] and not have been freed.
 */
void tc_matcher_free(TcMatcher *matcher);

/*
 Lowercase hex SHA-256 of salt‖author. An empty salt is rejected.

 # Safety
 `author` and `salt` must be NUL-terminated; `out` writable.
 */
TcStatus tc_anonymize(const char *author, const char *salt, char **out);

/*
 Parse a `keyword: score, ...` model response into
 `{"entries": [{"keyword", "importance"}], "skipped": n}`.

 # Safety
 `text` must be NUL-terminated; `out_json` writable.
 */
TcStatus tc_parse_scored_keywords(const char *text, char **out_json);

/*
 Drop every keyword that contains another keyword of the set as a
 contiguous token run. Input and output are JSON arrays of strings.

 # Safety
 `keywords_json` must be NUL-terminated; `out_json` writable.
 */
TcStatus tc_containment_filter(const char *keywords_json, char **out_json);

/*
 Open a plain or zstd-compressed ndjson dump. `options_json` may be NULL
 for defaults, or an object such as `{"max_skip_ratio": 0.01}`.

 # Safety
 `path` must be NUL-terminated; `options_json` NULL or NUL-terminated;
 `out` writable.
 */
TcStatus tc_dump_reader_open(const char *path,
                             TcRecordKind kind,
                             const char *options_json,
                             TcDumpReader **out);

/*
 Next record as JSON, or `TC_STATUS_END_OF_STREAM`. Malformed lines are
 skipped; exceeding the skip ratio or a corrupt stream is an error.

 # Safety
 `reader` must be a live handle; `out_json` writable.
 */
TcStatus tc_dump_reader_next(TcDumpReader *reader, char **out_json);

/*
 Counters so far: `{lines_read, records_parsed, lines_skipped_malformed,
 bytes_read}`.

 # Safety
 `reader` must be a live handle; `out_json` writable.
 */
TcStatus tc_dump_reader_stats(const TcDumpReader *reader, char **out_json);

/*
 # Safety
 `reader` must come from [`tc_dump_reader_open`] and not have been freed.
 */
void tc_dump_reader_free(TcDumpReader *reader);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOPICORPUS_H */
