/* Stable C interface to the hkelab pipeline. */
#ifndef HKELAB_H
#define HKELAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define HKELAB_API __declspec(dllexport)
#else
#define HKELAB_API __attribute__((visibility("default")))
#endif

typedef enum hkelab_status {
  HKELAB_OK = 0,
  HKELAB_CHECK_FAILED = 1,     /* ran to completion, a named check failed */
  HKELAB_INVALID_ARGUMENT = 2, /* bad argument, unknown key, malformed config */
  HKELAB_IO_ERROR = 3,
  HKELAB_NUMERICAL_ERROR = 4,
  HKELAB_STAGE_FAILED = 5,     /* a pipeline stage threw; see the failed-stage marker */
  HKELAB_INTERNAL_ERROR = 6
} hkelab_status;

typedef struct hkelab_config hkelab_config;
typedef struct hkelab_run hkelab_run;

HKELAB_API const char* hkelab_version(void);

/* Message of the last failing call on this thread; never NULL. */
HKELAB_API const char* hkelab_last_error(void);

/* Configuration. `path`/`text` use the key = value format. */
HKELAB_API hkelab_status hkelab_config_load(const char* path, hkelab_config** out);
HKELAB_API hkelab_status hkelab_config_parse(const char* text, hkelab_config** out);
HKELAB_API hkelab_status hkelab_config_set(hkelab_config* cfg, const char* key, const char* value);
HKELAB_API hkelab_status hkelab_config_validate(const hkelab_config* cfg);
/* Copies the 16 hex digits plus NUL into `buf` (len >= 17). */
HKELAB_API hkelab_status hkelab_config_hash(const hkelab_config* cfg, char* buf, size_t len);
HKELAB_API void hkelab_config_free(hkelab_config* cfg);

/* Runs the pipeline; `stop_after` NULL or "" runs every stage. On
 * HKELAB_STAGE_FAILED `*out` is NULL and the run directory holds the partial
 * reports. */
HKELAB_API hkelab_status hkelab_run_pipeline(const hkelab_config* cfg, const char* stop_after,
                                             hkelab_run** out);
/* Opens an existing run directory (reads its manifest). */
HKELAB_API hkelab_status hkelab_run_open(const char* run_dir, hkelab_run** out);
HKELAB_API const char* hkelab_run_dir(const hkelab_run* run);
HKELAB_API size_t hkelab_run_stage_count(const hkelab_run* run);
HKELAB_API const char* hkelab_run_stage_name(const hkelab_run* run, size_t i);
HKELAB_API const char* hkelab_run_stage_status(const hkelab_run* run, size_t i);
HKELAB_API size_t hkelab_run_check_count(const hkelab_run* run);
HKELAB_API const char* hkelab_run_check_name(const hkelab_run* run, size_t i);
HKELAB_API int hkelab_run_check_passed(const hkelab_run* run, size_t i);
/* 1 when every named check passed. */
HKELAB_API int hkelab_run_passed(const hkelab_run* run);
HKELAB_API int hkelab_run_complete(const hkelab_run* run);
HKELAB_API int hkelab_run_reused(const hkelab_run* run);
HKELAB_API void hkelab_run_free(hkelab_run* run);

/* <out_dir>/<config hash>, the directory a run of `cfg` writes to. */
HKELAB_API hkelab_status hkelab_config_run_dir(const hkelab_config* cfg, char* buf, size_t len, size_t* needed);
/* Text results are copied into caller buffers. `*needed` (optional) receives
 * the full length including the terminating NUL; a short buffer yields
 * HKELAB_INVALID_ARGUMENT with the text truncated. */
HKELAB_API hkelab_status hkelab_curve_names(const char* run_dir, char* buf, size_t len, size_t* needed);
/* CSV of one curve to `out_path`, or into `buf` when out_path is NULL. */
HKELAB_API hkelab_status hkelab_emit_plot_data(const char* run_dir, const char* curve, const char* out_path,
                                               char* buf, size_t len, size_t* needed);
/* HKELAB_OK when everything re-derives, HKELAB_CHECK_FAILED otherwise; the
 * per-item report goes to `buf`. */
HKELAB_API hkelab_status hkelab_verify(const char* run_dir, char* buf, size_t len, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif /* HKELAB_H */
