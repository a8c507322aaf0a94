/*
 * C API of the sartop shared library.
 *
 * All functions return SARTOP_OK (0) on success or a SARTOP_ERR_* code;
 * sartop_last_error() describes the most recent failure on the calling
 * thread. Objects come back through opaque handles that must be released
 * with the matching *_free function.
 */
#ifndef SARTOP_H_
#define SARTOP_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define SARTOP_OK 0
#define SARTOP_ERR_INVALID_ARGUMENT 1
#define SARTOP_ERR_SHAPE 2
#define SARTOP_ERR_PARSE 3
#define SARTOP_ERR_IO 4
#define SARTOP_ERR_DOMAIN 5
#define SARTOP_ERR_INTERNAL 6

typedef struct sartop_dataset sartop_dataset;
typedef struct sartop_report sartop_report;

const char* sartop_version(void);

/* Message of the last error on this thread; valid until the next failing
 * call on the same thread. */
const char* sartop_last_error(void);

/* --- datasets ---------------------------------------------------------- */

/* mixture_json: {"n_classes":7,"feature_dim":8,"counts":[...],
 * "separation":3.0,"spread":1.0,"seed":42,"sample_stream":0}. Every field
 * is optional except that counts, when present, must match n_classes.
 * sample_stream selects a disjoint noise stream around the same class
 * means (use different values for train and test splits). */
int sartop_dataset_synthesize(const char* mixture_json, sartop_dataset** out);

int sartop_dataset_load_manifest(const char* path, sartop_dataset** out);
int sartop_dataset_save_manifest(const sartop_dataset* ds, const char* path);
int sartop_dataset_info(const sartop_dataset* ds, uint32_t* n_rows,
                        uint32_t* n_features, uint32_t* n_classes);
void sartop_dataset_free(sartop_dataset* ds);

/* Tiles one or more 16-bit PGM images into patch feature rows, labelled by
 * per-image sidecar files ("origin_x,origin_y,label" per line).
 * apply_log_transform != 0 maps every pixel through ln(1+v) first.
 * n_classes <= 0 infers the class count from the labels. */
int sartop_ingest_pgm(const char* const* image_paths,
                      const char* const* sidecar_paths, size_t n_images,
                      uint32_t patch_size, int apply_log_transform,
                      int32_t n_classes, sartop_dataset** out);

/* --- experiments ------------------------------------------------------- */

/* config_json is the experiment configuration document (see README);
 * unknown fields are rejected. The returned report has one row per seed. */
int sartop_run_experiment(const char* config_json, sartop_report** out);

/* Bagging: n_models bootstrap sub-models per seed plus one ensemble row. */
int sartop_run_bagging(const char* config_json, uint32_t n_models,
                       sartop_report** out);

/* Scores a saved checkpoint against a dataset manifest; *metrics_json_out
 * receives a JSON object (release with sartop_string_free). */
int sartop_evaluate_checkpoint(const char* checkpoint_path,
                               const char* manifest_path,
                               char** metrics_json_out);

void sartop_string_free(char* s);

/* --- reports ----------------------------------------------------------- */

/* Reads a report written by sartop_report_write (format detected). */
int sartop_report_load(const char* path, sartop_report** out);

/* Appends all rows of src to dst. */
int sartop_report_append(sartop_report* dst, const sartop_report* src);

/* format: "csv" or "json". Refuses to write an empty report. */
int sartop_report_write(const sartop_report* report, const char* path,
                        const char* format);

int sartop_report_row_count(const sartop_report* report, size_t* out);

/* One row as a JSON object string (release with sartop_string_free). */
int sartop_report_row_json(const sartop_report* report, size_t index,
                           char** json_out);

void sartop_report_free(sartop_report* report);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SARTOP_H_ */
