#ifndef HOTTCHECK_H
#define HOTTCHECK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of an interface call.
typedef enum HottStatus {
  HOTT_STATUS_OK = 0,
  // A required pointer argument was null.
  HOTT_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  HOTT_STATUS_INVALID_UTF8 = 2,
  HOTT_STATUS_PARSE = 3,
  HOTT_STATUS_SCOPE = 4,
  HOTT_STATUS_TYPE = 5,
  HOTT_STATUS_UNIV = 6,
  HOTT_STATUS_HIT_SCHEMA = 7,
  HOTT_STATUS_LOOP_FORM = 8,
  // A panic inside the checker.
  HOTT_STATUS_INTERNAL = 9,
} HottStatus;

// Opaque checking session.
typedef struct HottSession HottSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a session, with the prelude loaded when `with_prelude` is
// true. Returns null if the prelude fails to check.
struct HottSession *hott_session_new(bool with_prelude);

// Releases a session. Null is ignored.
//
// # Safety
// `s` must be null or a session from `hott_session_new` not yet freed.
void hott_session_free(struct HottSession *s);

// Checks a source text and adds its declarations to the session. `path`
// is used in diagnostics only. On failure nothing from the text after
// the failing declaration is added.
//
// # Safety
// `s` must be null or a live session; `path` and `source` must be null or
// NUL-terminated strings.
enum HottStatus hott_session_check(struct HottSession *s, const char *path, const char *source);

// Number of declarations in the session.
//
// # Safety
// `s` must be null or a live session.
uintptr_t hott_session_declaration_count(const struct HottSession *s);

// Writes the winding number of the named loop to `out`.
//
// # Safety
// `s` must be null or a live session; `name` must be null or a
// NUL-terminated string; `out` must be null or writable.
enum HottStatus hott_session_winding(struct HottSession *s, const char *name, int64_t *out);

// Stores the printed normal form of the named declaration in `out`; free
// it with `hott_string_free`.
//
// # Safety
// `s` must be null or a live session; `name` must be null or a
// NUL-terminated string; `out` must be null or writable.
enum HottStatus hott_session_normal_form(struct HottSession *s, const char *name, char **out);

// The last diagnostic as a tab-separated record (code, file, line,
// column, message), or null. Owned by the session; valid until the next
// call on it.
//
// # Safety
// `s` must be null or a live session.
const char *hott_session_last_error(const struct HottSession *s);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `p` must be null or a string returned by this library, freed once.
void hott_string_free(char *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOTTCHECK_H */
