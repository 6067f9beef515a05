/* SPDX-License-Identifier: Apache-2.0 */
#ifndef DUNE_DUNE_H
#define DUNE_DUNE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DUNE_BUILDING_LIBRARY)
#    define DUNE_API __declspec(dllexport)
#  else
#    define DUNE_API __declspec(dllimport)
#  endif
#else
#  define DUNE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dune_status {
  DUNE_OK = 0,
  DUNE_E_USAGE = 1,    /* bad arguments or configuration */
  DUNE_E_DATA = 2,     /* missing, corrupt or inconsistent data */
  DUNE_E_NUMERIC = 3,  /* non-finite loss, numeric failure */
  DUNE_E_INTERNAL = 4  /* a bug; the message says where */
} dune_status;

typedef enum dune_log_level {
  DUNE_LOG_ERROR = 0,
  DUNE_LOG_WARN = 1,
  DUNE_LOG_INFO = 2,
  DUNE_LOG_DEBUG = 3
} dune_log_level;

typedef struct dune_context dune_context;
typedef struct dune_model dune_model;

typedef void (*dune_log_fn)(dune_log_level level, const char* message, void* user);

DUNE_API const char* dune_version(void);
DUNE_API const char* dune_status_name(dune_status status);

/* A context owns one output directory and its layered configuration:
   defaults < <out>/data/dune.cfg < config files < DUNE_* environment < overrides. */
DUNE_API dune_status dune_context_create(const char* out_dir, dune_context** out);
DUNE_API void dune_context_destroy(dune_context* ctx);
DUNE_API dune_status dune_context_add_config_file(dune_context* ctx, const char* path);
DUNE_API dune_status dune_context_set(dune_context* ctx, const char* key, const char* value);
DUNE_API dune_status dune_context_use_environment(dune_context* ctx, int enabled);
DUNE_API dune_status dune_context_set_log_level(dune_context* ctx, dune_log_level level);
DUNE_API dune_status dune_context_set_log_callback(dune_context* ctx, dune_log_fn fn, void* user);

/* Resolved configuration value, or NULL for an unknown key. Valid until the
   next call on the same context. */
DUNE_API const char* dune_context_get(dune_context* ctx, const char* key);
/* Full resolved configuration as "key = value" lines. */
DUNE_API const char* dune_context_config_dump(dune_context* ctx);
/* Message of the last failed call on this context ("" after success). */
DUNE_API const char* dune_context_last_error(const dune_context* ctx);
/* JSON summary produced by the last successful command. */
DUNE_API const char* dune_context_result_json(const dune_context* ctx);

/* Pipeline commands. Outputs go under the context's directory. String
   arguments documented as optional may be NULL. */
DUNE_API dune_status dune_synth(dune_context* ctx, int n_lat, int n_lon, int years, int last_year, uint64_t seed,
                                double noise_scale);
DUNE_API dune_status dune_ingest(dune_context* ctx, const char* const* sources, size_t n_sources,
                                 const char* range /* optional "YYYY-MM:YYYY-MM" */);
DUNE_API dune_status dune_climatology(dune_context* ctx);
DUNE_API dune_status dune_train(dune_context* ctx);
DUNE_API dune_status dune_forecast(dune_context* ctx, const char* range /* optional */);
DUNE_API dune_status dune_rollout(dune_context* ctx, const char* start, int horizon, int truth_feedback);
DUNE_API dune_status dune_baseline(dune_context* ctx, const char* kinds /* optional, comma separated */);
DUNE_API dune_status dune_score(dune_context* ctx, const char* const* category_files, size_t n_files);
DUNE_API dune_status dune_ensemble(dune_context* ctx, const char* members_dir /* optional */, int coarsen);
DUNE_API dune_status dune_plot(dune_context* ctx, const char* what, const char* map_stamp /* optional */);
DUNE_API dune_status dune_model_summary(dune_context* ctx);

/* Direct inference on a checkpoint file. Input layout is channel-major
   [in_channels][n_lat][n_lon] of normalized values; output [out_channels][n_lat][n_lon]. */
DUNE_API dune_status dune_model_open(const char* checkpoint_path, dune_model** out);
DUNE_API void dune_model_close(dune_model* model);
DUNE_API const char* dune_model_last_error(const dune_model* model);
DUNE_API size_t dune_model_parameter_count(const dune_model* model);
DUNE_API int dune_model_in_channels(const dune_model* model);
DUNE_API int dune_model_out_channels(const dune_model* model);
DUNE_API int dune_model_n_lat(const dune_model* model);
DUNE_API int dune_model_n_lon(const dune_model* model);
/* heads may be NULL; otherwise it receives 4 * out_len values, head-major. */
DUNE_API dune_status dune_model_forward(dune_model* model, const float* input, size_t in_len, float* mean_out,
                                        size_t out_len, float* heads);

#ifdef __cplusplus
}
#endif

#endif /* DUNE_DUNE_H */
