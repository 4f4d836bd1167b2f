/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef INQUEST_H
#define INQUEST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum InqStatus {
  INQ_STATUS_OK = 0,
  INQ_STATUS_NULL_ARGUMENT = 1,
  INQ_STATUS_INVALID_UTF8 = 2,
  /**
   * Input could not be read or parsed.
   */
  INQ_STATUS_INPUT = 3,
  /**
   * Input was read but violates the data model.
   */
  INQ_STATUS_INVALID = 4,
  INQ_STATUS_NOT_FOUND = 5,
  /**
   * A computation over valid input failed, e.g. a missing metric.
   */
  INQ_STATUS_EVALUATION = 6,
  INQ_STATUS_PANIC = 7,
} InqStatus;

typedef struct InqDataset InqDataset;

typedef struct InqEvaluation InqEvaluation;

typedef struct InqRuleSet InqRuleSet;

/**
 * One evaluation. `category` is the ASCII letter A, B, C or D.
 */
typedef struct InqEvaluationRecord {
  uint8_t category;
  bool effective;
  bool degenerate;
  uint32_t run_order;
  double effectiveness;
  double effort_fraction;
  uintptr_t selected_count;
  uintptr_t defect_prone_count;
} InqEvaluationRecord;

typedef struct InqSourceMetrics {
  uintptr_t loc;
  uintptr_t method_count;
  double mean_method_length;
  uint32_t cyclomatic_max;
  double cyclomatic_mean;
} InqSourceMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *inq_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *inq_version(void);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void inq_string_free(char *s);

/**
 * Load and validate a dataset directory.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum InqStatus inq_dataset_load(const char *path, struct InqDataset **out);

/**
 * # Safety
 * `d` must come from [`inq_dataset_load`] and not have been freed.
 */
void inq_dataset_free(struct InqDataset *d);

/**
 * Number of runs; 0 for a null handle.
 *
 * # Safety
 * `d` must be null or a live dataset handle.
 */
uintptr_t inq_dataset_run_count(const struct InqDataset *d);

/**
 * Rules of a bundled catalog (`table1` or `casestudy2`).
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum InqStatus inq_ruleset_builtin(const char *name, struct InqRuleSet **out);

/**
 * Rules generated from an assumption catalog given as JSON text.
 *
 * # Safety
 * `catalog_json` must be a NUL-terminated string; `out` must be writable.
 */
enum InqStatus inq_ruleset_generate(const char *catalog_json, struct InqRuleSet **out);

/**
 * A rule set previously serialized with [`inq_ruleset_to_json`].
 *
 * # Safety
 * `rules_json` must be a NUL-terminated string; `out` must be writable.
 */
enum InqStatus inq_ruleset_load(const char *rules_json, struct InqRuleSet **out);

/**
 * Number of rules; 0 for a null handle.
 *
 * # Safety
 * `r` must be null or a live rule set handle.
 */
uintptr_t inq_ruleset_len(const struct InqRuleSet *r);

/**
 * # Safety
 * `r` must be a live rule set handle; `out` must be writable.
 */
enum InqStatus inq_ruleset_to_json(const struct InqRuleSet *r, char **out);

/**
 * # Safety
 * `r` must come from this library and not have been freed.
 */
void inq_ruleset_free(struct InqRuleSet *r);

/**
 * Evaluate every rule on every run, ordered by run then rule.
 *
 * # Safety
 * `d` and `r` must be live handles; `out` must be writable.
 */
enum InqStatus inq_evaluate(const struct InqDataset *d,
                            const struct InqRuleSet *r,
                            struct InqEvaluation **out);

/**
 * # Safety
 * `e` must be null or a live evaluation handle.
 */
uintptr_t inq_evaluation_len(const struct InqEvaluation *e);

/**
 * Copy evaluation `index` into `out`.
 *
 * # Safety
 * `e` must be a live evaluation handle; `out` must be writable.
 */
enum InqStatus inq_evaluation_get(const struct InqEvaluation *e,
                                  uintptr_t index,
                                  struct InqEvaluationRecord *out);

/**
 * Rule id of evaluation `index`, owned by the handle; null when out of
 * range.
 *
 * # Safety
 * `e` must be null or a live evaluation handle.
 */
const char *inq_evaluation_rule_id(const struct InqEvaluation *e, uintptr_t index);

/**
 * Run id of evaluation `index`, owned by the handle; null when out of
 * range.
 *
 * # Safety
 * `e` must be null or a live evaluation handle.
 */
const char *inq_evaluation_run_id(const struct InqEvaluation *e, uintptr_t index);

/**
 * # Safety
 * `e` must come from [`inq_evaluate`] and not have been freed.
 */
void inq_evaluation_free(struct InqEvaluation *e);

/**
 * Selections of every rule on one run as CSV with columns
 * `rule_id,run_id,rank,unit_id`.
 *
 * # Safety
 * `d` and `r` must be live handles, `run_id` a NUL-terminated string and
 * `out` writable.
 */
enum InqStatus inq_prioritize_csv(const struct InqDataset *d,
                                  const struct InqRuleSet *r,
                                  const char *run_id,
                                  char **out);

/**
 * Size and complexity metrics of one source text.
 *
 * # Safety
 * `name` and `text` must be NUL-terminated strings; `out` must be
 * writable.
 */
enum InqStatus inq_extract_source(const char *name, const char *text, struct InqSourceMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INQUEST_H */
