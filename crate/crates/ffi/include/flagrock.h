#ifndef FLAGROCK_H
#define FLAGROCK_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FlagrockCase {
  FLAGROCK_CASE_FIRST = 0,
  FLAGROCK_CASE_SECOND = 1,
  FLAGROCK_CASE_DEGENERATE = 2,
} FlagrockCase;

typedef enum FlagrockStatus {
  FLAGROCK_STATUS_OK = 0,
  FLAGROCK_STATUS_INVALID_PARAMETERS = 2,
  FLAGROCK_STATUS_CONSISTENCY = 3,
  FLAGROCK_STATUS_NULL_POINTER = 4,
  FLAGROCK_STATUS_INVALID_UTF8 = 5,
  FLAGROCK_STATUS_OUT_OF_RANGE = 6,
  FLAGROCK_STATUS_PANIC = 7,
} FlagrockStatus;

typedef enum FlagrockVerdict {
  FLAGROCK_VERDICT_UNDETERMINED = -1,
  FLAGROCK_VERDICT_NOT_MAXIMAL_HYPOELLIPTIC = 0,
  FLAGROCK_VERDICT_MAXIMAL_HYPOELLIPTIC = 1,
} FlagrockVerdict;

/**
 * Opaque analysis report.
 */
typedef struct FlagrockReport FlagrockReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Run the full analysis of `U(p,q) ⊃ U(p1) × U(p − p1, q)`.
 *
 * `weights` is null for the default form, or a comma-separated list such
 * as `"sqrt2"` or `"3/2,2*sqrt2"`. On success `*out` receives a new report.
 *
 * # Safety
 * `weights` must be null or a valid NUL-terminated string; `out` must be
 * a valid pointer.
 */
enum FlagrockStatus flagrock_analyze(int64_t p,
                                     int64_t q,
                                     int64_t p1,
                                     const char *weights,
                                     struct FlagrockReport **out);

/**
 * # Safety
 * `report` must be null or a handle from `flagrock_analyze` not yet freed.
 */
void flagrock_report_free(struct FlagrockReport *report);

/**
 * # Safety
 * `report` must be a live handle; `out` a valid pointer.
 */
enum FlagrockStatus flagrock_report_case(const struct FlagrockReport *report,
                                         enum FlagrockCase *out);

/**
 * # Safety
 * `report` must be a live handle; `out` a valid pointer.
 */
enum FlagrockStatus flagrock_report_rockland_fails(const struct FlagrockReport *report, bool *out);

/**
 * # Safety
 * `report` must be a live handle; `out` a valid pointer.
 */
enum FlagrockStatus flagrock_report_verdict(const struct FlagrockReport *report,
                                            enum FlagrockVerdict *out);

/**
 * # Safety
 * `report` must be a live handle; `out` a valid pointer.
 */
enum FlagrockStatus flagrock_report_witness_count(const struct FlagrockReport *report, size_t *out);

/**
 * Degree, residual and exactness of witness `index`.
 *
 * # Safety
 * `report` must be a live handle; the out pointers must be valid.
 */
enum FlagrockStatus flagrock_report_witness(const struct FlagrockReport *report,
                                            size_t index,
                                            size_t *degree,
                                            double *residual,
                                            bool *exact);

/**
 * The report as JSON; release with `flagrock_string_free`.
 *
 * # Safety
 * `report` must be a live handle; `out` a valid pointer.
 */
enum FlagrockStatus flagrock_report_json(const struct FlagrockReport *report, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void flagrock_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into the library on the same thread.
 */
const char *flagrock_last_error_message(void);

/**
 * Library version, static storage.
 */
const char *flagrock_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLAGROCK_H */
