/* C interface of the eigencurve library.
 *
 * All functions return an ec_status; on failure ec_last_error() describes the
 * problem for the calling thread. Strings returned through char** are owned by
 * the caller and released with ec_string_free(). A session handle must not be
 * used from two threads at once, except for ec_session_status(), which may be
 * polled while another thread runs a long operation on the same handle.
 */
#ifndef EIGENCURVE_H
#define EIGENCURVE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(EIGENCURVE_BUILDING_LIBRARY)
#    define EC_API __declspec(dllexport)
#  else
#    define EC_API __declspec(dllimport)
#  endif
#else
#  define EC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct ec_session ec_session;

typedef enum ec_status {
  EC_OK = 0,
  EC_ERR_INVALID_ARGUMENT = 1,
  EC_ERR_DOMAIN = 2,
  EC_ERR_NUMERICAL = 3,
  EC_ERR_FORMAT = 4,
  EC_ERR_TOUCH = 5,
  EC_ERR_IO = 6,
  EC_ERR_INTERNAL = 7
} ec_status;

typedef enum ec_json_kind {
  EC_JSON_SESSION = 0,     /* full session document */
  EC_JSON_PLOT = 1,        /* curves, crossing and near-approach markers, labels */
  EC_JSON_SUMMARY = 2      /* flow, interval, crossing pairs, ve, block sizes, notices */
} ec_json_kind;

typedef struct ec_trace_config {
  double tau;
  double eta;
  int order;        /* truncation order j of the look-ahead formula */
  int past_points;  /* s */
  double restart_threshold;
  int max_restarts_per_curve;
  double residual_tolerance;
  int audit_interval;
  int store_vectors;
  int use_oracle;   /* nonzero: trace by static eigensolves instead of ZNN */
} ec_trace_config;

/* phase is "trace" or "extend"; fraction in [0, 1]. */
typedef void (*ec_progress_fn)(const char* phase, double fraction, void* user);

EC_API const char* ec_version(void);
EC_API const char* ec_last_error(void);
/* 1-based Touch row of the last EC_ERR_TOUCH on this thread, 0 otherwise. */
EC_API int ec_last_touch_row(void);
EC_API const char* ec_status_name(ec_status status);
EC_API void ec_string_free(char* s);

EC_API void ec_trace_config_default(ec_trace_config* cfg);

/* params_json: JSON object of numeric flow parameters, or NULL. */
EC_API ec_status ec_session_create(const char* flow_name, uint64_t seed, int obscure, const char* params_json,
                                   double t0, double tf, const ec_trace_config* cfg, ec_session** out);
EC_API ec_status ec_session_load(const char* path, ec_session** out);
EC_API ec_status ec_session_from_json(const char* json, ec_session** out);
EC_API ec_status ec_session_save(const ec_session* session, const char* path);
EC_API void ec_session_free(ec_session* session);

EC_API ec_status ec_session_trace(ec_session* session, ec_progress_fn progress, void* user);
EC_API ec_status ec_session_analyze(ec_session* session);
/* caveats_json (optional): JSON array of caveat strings. */
EC_API ec_status ec_session_infer(ec_session* session, char** caveats_json);
/* pairs: 2*count ints (a1, b1, a2, b2, ...); replaces the Touch list. */
EC_API ec_status ec_session_touch(ec_session* session, const int* pairs, size_t count);
/* notices_json (optional): JSON array of remapping notices. */
EC_API ec_status ec_session_extend(ec_session* session, double t0, double tf, ec_progress_fn progress, void* user,
                                   char** notices_json);
EC_API ec_status ec_session_export_csv(const ec_session* session, const char* directory);

EC_API ec_status ec_session_json(const ec_session* session, ec_json_kind kind, char** out);
EC_API ec_status ec_session_suggestions(const ec_session* session, double gap_threshold, int angle_window,
                                        double min_score, char** out);

EC_API ec_status ec_session_dimension(const ec_session* session, int* n);
/* Copies ve into labels (capacity cap); *has_labels = 0 when not inferred yet. */
EC_API ec_status ec_session_labels(const ec_session* session, int* labels, size_t cap, int* has_labels);

/* Thread-safe progress snapshot: phase ("idle", "trace", "extend") and fraction. */
EC_API ec_status ec_session_status(const ec_session* session, char* phase, size_t phase_cap, double* fraction);

#ifdef __cplusplus
}
#endif

#endif /* EIGENCURVE_H */
