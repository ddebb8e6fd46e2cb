#ifndef LOCCW_H
#define LOCCW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LoccwStatus {
  LOCCW_STATUS_OK = 0,
  LOCCW_STATUS_NULL_POINTER = 1,
  LOCCW_STATUS_INVALID_UTF8 = 2,
  LOCCW_STATUS_PARSE = 3,
  LOCCW_STATUS_INVALID_ARGUMENT = 4,
  LOCCW_STATUS_INTERNAL = 5,
} LoccwStatus;

/**
 * Opaque set handle.
 */
typedef struct LoccwMesSet LoccwMesSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *loccw_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next loccw call on the same thread.
 */
const char *loccw_last_error_message(void);

/**
 * Parses a set in any of the JSON set formats.
 *
 * # Safety
 * `json` must be a valid nul-terminated string and `out` a writable pointer.
 */
enum LoccwStatus loccw_set_from_json(const char *json, struct LoccwMesSet **out);

/**
 * Builds a named family; `d` = 0 for families without a dimension parameter.
 *
 * # Safety
 * `name` must be a valid nul-terminated string and `out` a writable pointer.
 */
enum LoccwStatus loccw_set_family(const char *name, uint32_t d, struct LoccwMesSet **out);

/**
 * Releases a set handle; null is ignored.
 *
 * # Safety
 * `set` must come from this library and not have been freed.
 */
void loccw_set_free(struct LoccwMesSet *set);

/**
 * Number of members.
 *
 * # Safety
 * `set` must be a live handle and `out` a writable pointer.
 */
enum LoccwStatus loccw_set_size(const struct LoccwMesSet *set, uintptr_t *out);

/**
 * Exact Weyl criterion; writes 1 for certified, 0 for inconclusive.
 *
 * # Safety
 * `set` must be a live handle and `out` a writable pointer.
 */
enum LoccwStatus loccw_criterion_verdict(const struct LoccwMesSet *set, int32_t *out);

/**
 * Full analysis report as JSON; release with `loccw_string_free`.
 *
 * # Safety
 * `set` must be a live handle and `out` a writable pointer.
 */
enum LoccwStatus loccw_analyze_json(const struct LoccwMesSet *set, char **out);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void loccw_string_free(char *s);

/**
 * Largest Schmidt coefficient of the detector for the weighted mixed family.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum LoccwStatus loccw_mixed_detector_lambda1(uint32_t d, double *out);

/**
 * Smallest certified set size in local dimension `dim` (4 ≤ dim ≤ 64).
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum LoccwStatus loccw_kmin(uint32_t dim, uint32_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOCCW_H */
