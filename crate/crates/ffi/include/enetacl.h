#ifndef ENETACL_H
#define ENETACL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum EnetaclStatus {
  ENETACL_STATUS_OK = 0,
  ENETACL_STATUS_NULL_ARGUMENT = 1,
  ENETACL_STATUS_INVALID_UTF8 = 2,
  ENETACL_STATUS_PARSE = 3,
  ENETACL_STATUS_UNKNOWN_NAME = 4,
  ENETACL_STATUS_MISSING_GROUP = 5,
  ENETACL_STATUS_SESSION = 6,
  ENETACL_STATUS_PANIC = 7,
} EnetaclStatus;

typedef enum EnetaclModel {
  ENETACL_MODEL_ENGL = 0,
  ENETACL_MODEL_ENLG = 1,
} EnetaclModel;

/**
 * How a simulated session ended.
 */
typedef enum EnetaclOutcome {
  ENETACL_OUTCOME_USED = 0,
  ENETACL_OUTCOME_DENIED = 1,
  ENETACL_OUTCOME_QUIT = 2,
} EnetaclOutcome;

/**
 * Opaque policy handle.
 */
typedef struct EnetaclPolicy EnetaclPolicy;

/**
 * Access decision. `level` and `group` are the operating level and 1-based
 * group position when allowed, 0 otherwise.
 */
typedef struct EnetaclDecision {
  bool allowed;
  uint8_t level;
  size_t group;
} EnetaclDecision;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and validates a JSON policy document.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out_policy` must be writable.
 */
enum EnetaclStatus enetacl_policy_parse(const char *text, struct EnetaclPolicy **out_policy);

/**
 * Releases a policy handle. Null is ignored.
 *
 * # Safety
 * `policy` must come from [`enetacl_policy_parse`] and not be used again.
 */
void enetacl_policy_free(struct EnetaclPolicy *policy);

/**
 * # Safety
 * `policy` must be a live handle; `out_model` must be writable.
 */
enum EnetaclStatus enetacl_policy_model(const struct EnetaclPolicy *policy,
                                        enum EnetaclModel *out_model);

/**
 * Decides whether `user` may access `resource`. `group` is required for
 * group-first policies; for level-first policies it is optional and
 * restricts the search.
 *
 * # Safety
 * Strings must be NUL-terminated (`group` may be null); `policy` must be a
 * live handle; `out_decision` must be writable.
 */
enum EnetaclStatus enetacl_check_access(const struct EnetaclPolicy *policy,
                                        const char *user,
                                        const char *resource,
                                        const char *group,
                                        struct EnetaclDecision *out_decision);

/**
 * Decides whether `user0` and `user1` may interact through `resource`.
 *
 * # Safety
 * As for [`enetacl_check_access`].
 */
enum EnetaclStatus enetacl_check_interact(const struct EnetaclPolicy *policy,
                                          const char *user0,
                                          const char *user1,
                                          const char *resource,
                                          const char *group,
                                          struct EnetaclDecision *out_decision);

/**
 * Writes the canonical JSON form of a policy.
 *
 * # Safety
 * `policy` must be a live handle; `out_text` must be writable. The result
 * must be released with [`enetacl_string_free`].
 */
enum EnetaclStatus enetacl_policy_serialize(const struct EnetaclPolicy *policy, char **out_text);

/**
 * Runs one session for `user` with comma-separated `script` answers.
 *
 * On success `out_trace` holds one tab-separated firing per line and
 * `out_audit` the JSON-lines audit record(s). With `deterministic` set,
 * timestamps come from a fixed clock starting at 2000-01-01T00:00:00Z.
 *
 * # Safety
 * Strings must be NUL-terminated; out pointers must be writable. Returned
 * strings must be released with [`enetacl_string_free`].
 */
enum EnetaclStatus enetacl_simulate(const struct EnetaclPolicy *policy,
                                    const char *user,
                                    const char *session_id,
                                    const char *script,
                                    bool deterministic,
                                    enum EnetaclOutcome *out_outcome,
                                    char **out_trace,
                                    char **out_audit);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used again.
 */
void enetacl_string_free(char *s);

/**
 * Message for the last failed call on this thread, or "" after success.
 * Valid until the next call on the same thread.
 */
const char *enetacl_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENETACL_H */
