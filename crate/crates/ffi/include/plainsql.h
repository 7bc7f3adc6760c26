#ifndef PLAINSQL_H
#define PLAINSQL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `PLAINSQL_STATUS_OK` is zero.
 */
typedef enum PlainsqlStatus {
  PLAINSQL_STATUS_OK = 0,
  PLAINSQL_STATUS_NULL_ARGUMENT = 1,
  PLAINSQL_STATUS_INVALID_UTF8 = 2,
  PLAINSQL_STATUS_BAD_REQUEST = 3,
  PLAINSQL_STATUS_UNKNOWN_DATABASE = 4,
  PLAINSQL_STATUS_UNKNOWN_RESULT = 5,
  PLAINSQL_STATUS_BACKEND_UNAVAILABLE = 6,
  PLAINSQL_STATUS_NO_TRANSLATION = 7,
  PLAINSQL_STATUS_UNSUPPORTED_SYNTAX = 8,
  PLAINSQL_STATUS_INVALID_SQL = 9,
  PLAINSQL_STATUS_REJECTED_STATEMENT = 10,
  PLAINSQL_STATUS_ONBOARDING_FAILED = 11,
  PLAINSQL_STATUS_EXECUTION_FAILED = 12,
  PLAINSQL_STATUS_INTERNAL = 13,
  PLAINSQL_STATUS_PANIC = 14,
} PlainsqlStatus;

/**
 * Opaque engine handle.
 */
typedef struct PlainsqlEngine PlainsqlEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next plainsql call on the same thread; do not free.
 */
const char *plainsql_last_error(void);

/**
 * Library version as a static string.
 */
const char *plainsql_version(void);

/**
 * Releases a string returned through an `out` parameter. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void plainsql_string_free(char *s);

/**
 * Opens (or creates) an engine over `data_dir`.
 *
 * The translator is the remote service at `backend_url` when given, else the
 * fixture file at `fixtures_path`, else an empty fixture table. Either may be
 * null.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum PlainsqlStatus plainsql_engine_open(const char *data_dir,
                                         const char *fixtures_path,
                                         const char *backend_url,
                                         struct PlainsqlEngine **out);

/**
 * Destroys an engine. Null is ignored.
 *
 * # Safety
 * `engine` must come from [`plainsql_engine_open`] and not be used afterwards.
 */
void plainsql_engine_free(struct PlainsqlEngine *engine);

/**
 * Onboards a csv or SQLite file. `config_json` is an onboarding config
 * object or null. Writes the onboarded schema as JSON to `out`.
 *
 * # Safety
 * Pointers must be valid as described on [`plainsql_engine_open`].
 */
enum PlainsqlStatus plainsql_onboard(const struct PlainsqlEngine *engine,
                                     const char *source_path,
                                     const char *config_json,
                                     char **out);

/**
 * Writes a JSON array of onboarded databases to `out`.
 *
 * # Safety
 * Pointers must be valid as described on [`plainsql_engine_open`].
 */
enum PlainsqlStatus plainsql_databases(const struct PlainsqlEngine *engine, char **out);

/**
 * Answers a question against a database. `reference_time` is
 * `YYYY-MM-DDTHH:MM:SS` or null for now. Writes the full response as JSON.
 *
 * # Safety
 * Pointers must be valid as described on [`plainsql_engine_open`].
 */
enum PlainsqlStatus plainsql_query(const struct PlainsqlEngine *engine,
                                   const char *database_id,
                                   const char *question,
                                   const char *reference_time,
                                   char **out);

/**
 * Writes one page (1-based, newest first) of query history as JSON.
 *
 * # Safety
 * Pointers must be valid as described on [`plainsql_engine_open`].
 */
enum PlainsqlStatus plainsql_history(const struct PlainsqlEngine *engine,
                                     const char *database_id,
                                     size_t page,
                                     char **out);

/**
 * Writes a stored result as CSV text.
 *
 * # Safety
 * Pointers must be valid as described on [`plainsql_engine_open`].
 */
enum PlainsqlStatus plainsql_result_csv(const struct PlainsqlEngine *engine,
                                        const char *result_id,
                                        char **out);

/**
 * Writes the plain-English explanation of `sql` to `out`. No engine needed.
 *
 * # Safety
 * `sql` must be NUL-terminated and `out` writable.
 */
enum PlainsqlStatus plainsql_explain(const char *sql, char **out);

/**
 * Rewrites date phrases in `query` relative to `reference_time` (or now)
 * and writes the normalized query with its substitutions as JSON.
 *
 * # Safety
 * String arguments must be null where allowed or NUL-terminated; `out`
 * must be writable.
 */
enum PlainsqlStatus plainsql_normalize_query(const char *query,
                                             const char *reference_time,
                                             char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PLAINSQL_H */
