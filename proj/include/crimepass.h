/* C API for the crimepass estimation engine.
 *
 * The library is driven through an opaque pipeline handle created from a
 * JSON config. All functions return a status code; the last error message
 * for a handle is available until the next call on that handle.
 */
#ifndef CRIMEPASS_H
#define CRIMEPASS_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct cp_pipeline cp_pipeline;

typedef enum cp_status {
  CP_OK = 0,
  CP_ERR_CONFIG = 1,     /* invalid config document or field */
  CP_ERR_IO = 2,         /* missing or unwritable file */
  CP_ERR_DATA = 3,       /* malformed rows, integrity violations */
  CP_ERR_ESTIMATION = 4, /* rank deficiency, degenerate samples */
  CP_ERR_INVALID = 5,    /* bad argument (null handle, unknown stage) */
  CP_ERR_INTERNAL = 6
} cp_status;

/* Library version, static storage. */
const char* cp_version(void);

/* Creates a pipeline from a JSON config file. On success *out owns the
 * handle and must be released with cp_pipeline_destroy. On failure *out is
 * NULL and the error text is available via cp_last_error(NULL). */
cp_status cp_pipeline_create(const char* config_path, const char* output_dir, cp_pipeline** out);

/* Same, but the config is passed as a JSON string. */
cp_status cp_pipeline_create_from_string(const char* config_json, const char* output_dir,
                                         cp_pipeline** out);

/* Caps worker threads (0 = hardware concurrency). Results do not depend on
 * the thread count. */
cp_status cp_pipeline_set_threads(cp_pipeline* pipeline, int threads);

/* Runs one stage: "simulate", "index", "stack", "estimate", "passthrough",
 * "welfare", "report", or "all". Artifacts are written to the output
 * directory given at creation. */
cp_status cp_pipeline_run(cp_pipeline* pipeline, const char* stage);

/* Hash of the canonical config form; embedded in every artifact. Owned by
 * the handle. */
const char* cp_pipeline_config_hash(const cp_pipeline* pipeline);

/* Message for the most recent failure on this handle; pass NULL for
 * creation failures. Owned by the library, valid until the next call. */
const char* cp_last_error(const cp_pipeline* pipeline);

void cp_pipeline_destroy(cp_pipeline* pipeline);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CRIMEPASS_H */
