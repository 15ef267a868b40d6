#ifndef ORDMTL_H
#define ORDMTL_H

/* C API for the ordinal multi-task toolkit: synthetic ordinal datasets,
 * threshold-decomposed classifier experiments, reports and charts.
 *
 * Every function returns ORDMTL_OK on success; on failure the returned code
 * classifies the problem and ordmtl_last_error() holds a message (thread
 * local, valid until the next failing call on the same thread). Out-pointers
 * are written only on success. Strings returned through char** out-params are
 * heap-allocated; release them with ordmtl_string_free. Handles are released
 * with their matching _free function; NULL is a no-op there.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ordmtl_status {
  ORDMTL_OK = 0,
  ORDMTL_INVALID_ARGUMENT = 1, /* bad values or NULL pointers */
  ORDMTL_CONFIG_ERROR = 2,     /* invalid or contradictory configuration */
  ORDMTL_IO_ERROR = 3,         /* filesystem failures */
  ORDMTL_PARSE_ERROR = 4,      /* malformed file content */
  ORDMTL_NUMERIC_ERROR = 5,    /* non-finite values during computation */
  ORDMTL_METRIC_ERROR = 6,     /* metric preconditions not met */
  ORDMTL_INTERNAL_ERROR = 7
} ordmtl_status;

typedef struct ordmtl_dataset ordmtl_dataset;
typedef struct ordmtl_report ordmtl_report;

/* Library version as "major.minor.patch". Static storage, do not free. */
const char* ordmtl_version(void);

/* Message of this thread's most recent failure, or "" when none. */
const char* ordmtl_last_error(void);

void ordmtl_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

/* config_json: generator config document (JSON object); NULL or "{}" for the
 * defaults. */
ordmtl_status ordmtl_dataset_generate(const char* config_json, ordmtl_dataset** out);

ordmtl_status ordmtl_dataset_load(const char* path, ordmtl_dataset** out);
ordmtl_status ordmtl_dataset_save(const ordmtl_dataset* dataset, const char* path);
void ordmtl_dataset_free(ordmtl_dataset* dataset);

/* Any out-pointer may be NULL when the value is not wanted. feature_count is
 * per sample (vector length, or side*side for images). */
ordmtl_status ordmtl_dataset_info(const ordmtl_dataset* dataset, int64_t* n_samples,
                                  int64_t* n_patients, int* num_ranks, int* feature_count,
                                  int* is_image);

/* Writes num_ranks values (post-noise label shares); len must match. */
ordmtl_status ordmtl_dataset_class_proportions(const ordmtl_dataset* dataset, double* out,
                                               int len);

/* ---- experiments ------------------------------------------------------- */

typedef void (*ordmtl_progress_fn)(int completed, int total, const char* job, void* user);

/* config_json: experiment config document; NULL or "{}" for the defaults.
 * n_threads 0 picks the hardware concurrency. progress may be NULL. */
ordmtl_status ordmtl_experiment_run(const char* config_json, int n_threads,
                                    ordmtl_progress_fn progress, void* user,
                                    ordmtl_report** out);

ordmtl_status ordmtl_report_load_json(const char* path, ordmtl_report** out);
void ordmtl_report_free(ordmtl_report* report);

ordmtl_status ordmtl_report_csv(const ordmtl_report* report, char** out);
ordmtl_status ordmtl_report_json(const ordmtl_report* report, char** out);
ordmtl_status ordmtl_report_svg(const ordmtl_report* report, char** out);
ordmtl_status ordmtl_report_summary(const ordmtl_report* report, char** out);

/* ---- gradient check ---------------------------------------------------- */

/* Runs the built-in finite-difference suite covering every layer kind.
 * Writes the worst relative error and, when report_text is non-NULL, a
 * per-tensor breakdown. Tolerance judgement is the caller's. */
ordmtl_status ordmtl_gradcheck(uint64_t seed, double* max_rel_error, char** report_text);

#ifdef __cplusplus
}
#endif

#endif /* ORDMTL_H */
