#ifndef WAVESPLIT_H
#define WAVESPLIT_H

/* Generated from the wavesplit-ffi crate by cbindgen; edit src/lib.rs, not this file. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of an FFI call.
 */
typedef enum WsStatus {
  /**
   * Success.
   */
  WS_STATUS_OK = 0,
  /**
   * Null pointer, invalid UTF-8, or an out-of-range argument.
   */
  WS_STATUS_INVALID_CALL = 1,
  /**
   * The scenario configuration is invalid.
   */
  WS_STATUS_CONFIG = 2,
  /**
   * A runtime precondition was violated (wrap-around guard, calibration
   * mismatch, undetected mode, ...).
   */
  WS_STATUS_PRECONDITION = 3,
  /**
   * A file could not be read or written.
   */
  WS_STATUS_IO = 4,
  /**
   * Internal error (caught panic).
   */
  WS_STATUS_INTERNAL = 5,
} WsStatus;

/**
 * Wave-mode selector for queries against a diagnosis.
 */
typedef enum WsMode {
  /**
   * Right-moving directed mode.
   */
  WS_MODE_RIGHT = 0,
  /**
   * Left-moving directed mode.
   */
  WS_MODE_LEFT = 1,
  /**
   * Non-propagating entropy mode (acoustic system only).
   */
  WS_MODE_ENTROPY = 2,
} WsMode;

/**
 * The result of running the inverse pipeline on a scenario.
 */
typedef struct WsDiagnosis WsDiagnosis;

/**
 * A parsed and validated scenario configuration.
 */
typedef struct WsScenario WsScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the library as a static NUL-terminated string.
 */
const char *ws_version(void);

/**
 * Message for the most recent failure on this thread (empty if none).
 * Valid until the next failing call on the same thread.
 */
const char *ws_last_error_message(void);

/**
 * Parses and validates a scenario from TOML text.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string; `out` must be a valid
 * pointer.
 */
enum WsStatus ws_scenario_parse(const char *text, struct WsScenario **out);

/**
 * Loads and validates a scenario from a TOML file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` must be a valid
 * pointer.
 */
enum WsStatus ws_scenario_load(const char *path, struct WsScenario **out);

/**
 * Releases a scenario handle (null is ignored).
 *
 * # Safety
 * `scenario` must be null or a pointer obtained from `ws_scenario_parse`
 * or `ws_scenario_load`, not yet freed.
 */
void ws_scenario_free(struct WsScenario *scenario);

/**
 * Calibrates the detection baseline δ for the scenario (which must contain
 * only right-moving pulses) and writes it to `out_delta`.
 *
 * # Safety
 * `scenario` must be a live scenario handle; `out_delta` must be a valid
 * pointer.
 */
enum WsStatus ws_scenario_calibrate(const struct WsScenario *scenario,
                                    uint32_t trials,
                                    double *out_delta);

/**
 * Runs the inverse pipeline (simulate → observe → detect → reconstruct →
 * localize) with the given calibrated baseline `delta` (use the value from
 * `ws_scenario_calibrate`, or 0.0 for noiseless exact sampling).
 *
 * # Safety
 * `scenario` must be a live scenario handle; `out` must be a valid
 * pointer.
 */
enum WsStatus ws_scenario_diagnose(const struct WsScenario *scenario,
                                   double delta,
                                   struct WsDiagnosis **out);

/**
 * Releases a diagnosis handle (null is ignored).
 *
 * # Safety
 * `diagnosis` must be null or a pointer obtained from
 * `ws_scenario_diagnose`, not yet freed.
 */
void ws_diagnosis_free(struct WsDiagnosis *diagnosis);

/**
 * Writes 1 to `out` if the given mode (0 right, 1 left, 2 entropy) was
 * detected, 0 otherwise.
 *
 * # Safety
 * `diagnosis` must be a live diagnosis handle; `out` must be a valid
 * pointer.
 */
enum WsStatus ws_diagnosis_detected(const struct WsDiagnosis *diagnosis, int32_t mode, bool *out);

/**
 * Discrete norm of the whole measured series.
 *
 * # Safety
 * `diagnosis` must be a live diagnosis handle; `out` must be a valid
 * pointer.
 */
enum WsStatus ws_diagnosis_norm_total(const struct WsDiagnosis *diagnosis, double *out);

/**
 * Norm of the series content in the given directed mode's complement:
 * mode 1 (left) reports ‖φ − P₊φ‖ and mode 0 (right) reports ‖φ − P₋φ‖.
 * The entropy mode has no residual and is rejected.
 *
 * # Safety
 * `diagnosis` must be a live diagnosis handle; `out` must be a valid
 * pointer.
 */
enum WsStatus ws_diagnosis_residual(const struct WsDiagnosis *diagnosis, int32_t mode, double *out);

/**
 * Estimated mode weights: writes α̂ (right) and β̂ (left).
 *
 * # Safety
 * `diagnosis` must be a live diagnosis handle; both out-pointers must be
 * valid.
 */
enum WsStatus ws_diagnosis_weights(const struct WsDiagnosis *diagnosis,
                                   double *out_alpha,
                                   double *out_beta);

/**
 * Threshold-crossing arrival time of the dominant detected mode. Fails
 * with `WS_STATUS_PRECONDITION` when no directed mode was detected.
 *
 * # Safety
 * `diagnosis` must be a live diagnosis handle; `out` must be a valid
 * pointer.
 */
enum WsStatus ws_diagnosis_arrival_time(const struct WsDiagnosis *diagnosis, double *out);

/**
 * Inferred source position of the dominant detected mode. Fails with
 * `WS_STATUS_PRECONDITION` when no directed mode was detected.
 *
 * # Safety
 * `diagnosis` must be a live diagnosis handle; `out` must be a valid
 * pointer.
 */
enum WsStatus ws_diagnosis_source_position(const struct WsDiagnosis *diagnosis, double *out);

/**
 * Serializes the full diagnostics report as JSON. The returned string is
 * owned by the caller; release it with `ws_string_free`.
 *
 * # Safety
 * `diagnosis` must be a live diagnosis handle; `out` must be a valid
 * pointer.
 */
enum WsStatus ws_diagnosis_report_json(const struct WsDiagnosis *diagnosis, char **out);

/**
 * Releases a string returned by this library (null is ignored).
 *
 * # Safety
 * `string` must be null or a pointer obtained from
 * `ws_diagnosis_report_json`, not yet freed.
 */
void ws_string_free(char *string);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAVESPLIT_H */
