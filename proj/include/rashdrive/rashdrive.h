/*
 * C interface to the rashdrive driving-behaviour analyzer.
 *
 * Objects are opaque handles created by *_load / *_create and released by the
 * matching *_free. Every fallible call returns an rd_status; on failure the
 * calling thread's rd_last_error() describes what went wrong.
 */
#ifndef RASHDRIVE_H
#define RASHDRIVE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RASHDRIVE_BUILDING_LIBRARY)
#    define RD_API __declspec(dllexport)
#  else
#    define RD_API __declspec(dllimport)
#  endif
#else
#  define RD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rd_status {
  RD_OK = 0,
  RD_ERR_INVALID_INPUT = 1,
  RD_ERR_EMPTY_REGION = 2,
  RD_ERR_BEHIND_CAMERA = 3,
  RD_ERR_HORIZON = 4,
  RD_ERR_NOT_ON_GROUND = 5,
  RD_ERR_INSUFFICIENT_DATA = 6,
  RD_ERR_NO_CONSENSUS = 7,
  RD_ERR_NO_LANE = 8,
  RD_ERR_PARSE = 9,
  RD_ERR_VALIDATION = 10,
  RD_ERR_IO = 11,
  RD_ERR_INTERNAL = 99
} rd_status;

typedef struct rd_calibration rd_calibration;
typedef struct rd_config rd_config;

typedef struct rd_summary {
  int frames;
  int pairs_processed;
  int rash_frames;
  int lane_change_events;
  int wrong_direction_events;
  int proximity_events;
  int accel_events;
  int rash_verdict_events;
  int error_events;
  int partial; /* non-zero when some frame-level step failed */
} rd_summary;

RD_API const char* rd_status_string(rd_status status);
/* Message of the last failed call on this thread; empty when none. */
RD_API const char* rd_last_error(void);

/* Calibration ------------------------------------------------------------ */
RD_API rd_status rd_calibration_load(const char* path, rd_calibration** out);
RD_API void rd_calibration_free(rd_calibration* calib);
RD_API rd_status rd_project_point(const rd_calibration* calib, double u, double v, double w,
                                  double* x, double* y);
RD_API rd_status rd_backproject_ground(const rd_calibration* calib, double x, double y,
                                       double* u, double* w);
RD_API rd_status rd_distance_to_object(const rd_calibration* calib, double bbox_x, double bbox_y,
                                       double bbox_width, double bbox_height, double class_offset,
                                       double* distance);

/* Configuration ------------------------------------------------------------ */
RD_API rd_status rd_config_create(rd_config** out);
RD_API rd_status rd_config_load(const char* path, rd_config** out);
RD_API void rd_config_free(rd_config* config);
/* Applies one dotted `key = value` setting (e.g. "flow.lambda", "0.05"). */
RD_API rd_status rd_config_set(rd_config* config, const char* key, const char* value);
RD_API rd_status rd_config_set_seed(rd_config* config, uint64_t seed);

/* Optical flow on gray float frames in [0,1], row-major, width*height each. */
RD_API rd_status rd_estimate_flow(const rd_config* config, const float* first, const float* second,
                                  int width, int height, float* u_out, float* v_out);
/* Flow of two Netpbm frames, written as an RFLO file. */
RD_API rd_status rd_flow_dump(const rd_config* config, const char* first_path, const char* second_path,
                              const char* out_path);

/* Pipeline ------------------------------------------------------------------ */
/* detections_path and overlay_dir may be NULL. summary may be NULL. */
RD_API rd_status rd_analyze(const rd_config* config, const char* frames_dir, const char* calib_path,
                            const char* detections_path, const char* events_path,
                            const char* overlay_dir, rd_summary* summary);
/* Writes the summary as a single-line JSON object into buf (NUL-terminated).
 * Returns the number of bytes needed excluding the terminator. */
RD_API size_t rd_summary_json(const rd_summary* summary, char* buf, size_t buf_size);

#ifdef __cplusplus
}
#endif

#endif /* RASHDRIVE_H */
