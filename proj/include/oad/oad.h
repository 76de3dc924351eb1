/*
 * C interface to the optical-attack detection library. All functions return
 * OAD_OK (0) on success or a nonzero status; oad_last_error() describes the
 * most recent failure on the calling thread. Handles are opaque and must be
 * released with their matching *_free function.
 */
#ifndef OAD_OAD_H
#define OAD_OAD_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef int32_t oad_status;

#define OAD_OK 0
#define OAD_ERROR_INVALID_ARGUMENT 1
#define OAD_ERROR_CONFIG 2
#define OAD_ERROR_PARSE 3
#define OAD_ERROR_IO 4
#define OAD_ERROR_CONTRACT 5
#define OAD_ERROR_INTERNAL 6

#define OAD_SCENARIO_BOTH 0
#define OAD_SCENARIO_LIDAR_STEREO 1
#define OAD_SCENARIO_THREE_CAMERAS 2

#define OAD_SWEEP_SPOOF_WIDTH 0
#define OAD_SWEEP_FACULA_COVERAGE 1

typedef struct oad_config oad_config;
typedef struct oad_thresholds oad_thresholds;
typedef struct oad_report oad_report;

const char* oad_version(void);

/* Message for the last failing call on this thread; empty string if none. */
const char* oad_last_error(void);

/* -- configuration -------------------------------------------------------- */

oad_status oad_config_default(oad_config** out);
oad_status oad_config_load(const char* path, oad_config** out);
oad_status oad_config_parse(const char* json_text, oad_config** out);
oad_status oad_config_set_seed(oad_config* config, uint64_t seed);
oad_status oad_config_set_output_dir(oad_config* config, const char* dir);
/* Copies the output directory into buf (NUL terminated). */
oad_status oad_config_get_output_dir(const oad_config* config, char* buf, size_t bufsize);
void oad_config_free(oad_config* config);

/* -- calibration ---------------------------------------------------------- */

oad_status oad_calibrate(const oad_config* config, oad_thresholds** out);
oad_status oad_thresholds_save(const oad_thresholds* thresholds, const char* path);
oad_status oad_thresholds_load(const char* path, oad_thresholds** out);
void oad_thresholds_free(oad_thresholds* thresholds);

/* -- experiments ---------------------------------------------------------- */

oad_status oad_run_detection(const oad_config* config, const oad_thresholds* thresholds,
                             int scenario, oad_report** out);
oad_status oad_run_identification(const oad_config* config,
                                  const oad_thresholds* thresholds, oad_report** out);
oad_status oad_run_sweep(const oad_config* config, const oad_thresholds* thresholds,
                         int axis, oad_report** out);

/* -- reports --------------------------------------------------------------- */

/* Writes report.json plus the experiment's CSV files into dir. */
oad_status oad_report_write(const oad_report* report, const char* dir);
/* Human-readable summary table; free with oad_string_free. */
oad_status oad_report_summary(const oad_report* report, char** out);
/* The report's JSON document; free with oad_string_free. */
oad_status oad_report_json(const oad_report* report, char** out);
void oad_report_free(oad_report* report);

/* Loads a report.json, recomputes all aggregates from the per-frame records
 * and fails on any mismatch; on success yields the summary table. */
oad_status oad_verify_report_file(const char* path, char** summary_out);

void oad_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* OAD_OAD_H */
