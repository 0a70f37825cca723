#include "rashdrive/rashdrive.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <string>

#include "rashdrive/config.hpp"
#include "rashdrive/error.hpp"
#include "rashdrive/geometry.hpp"
#include "rashdrive/netpbm.hpp"
#include "rashdrive/pipeline.hpp"

struct rd_calibration {
  rashdrive::Calibration value;
};

struct rd_config {
  rashdrive::PipelineConfig value;
};

namespace {

thread_local std::string last_error;

rd_status to_status(rashdrive::ErrorCode code) {
  using rashdrive::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidInput: return RD_ERR_INVALID_INPUT;
    case ErrorCode::EmptyRegion: return RD_ERR_EMPTY_REGION;
    case ErrorCode::BehindCamera: return RD_ERR_BEHIND_CAMERA;
    case ErrorCode::Horizon: return RD_ERR_HORIZON;
    case ErrorCode::NotOnGround: return RD_ERR_NOT_ON_GROUND;
    case ErrorCode::InsufficientData: return RD_ERR_INSUFFICIENT_DATA;
    case ErrorCode::NoConsensus: return RD_ERR_NO_CONSENSUS;
    case ErrorCode::NoLane: return RD_ERR_NO_LANE;
    case ErrorCode::Parse: return RD_ERR_PARSE;
    case ErrorCode::Validation: return RD_ERR_VALIDATION;
    case ErrorCode::Io: return RD_ERR_IO;
  }
  return RD_ERR_INTERNAL;
}

template <typename Fn>
rd_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    last_error.clear();
    return RD_OK;
  } catch (const rashdrive::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return RD_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return RD_ERR_INTERNAL;
  }
}

void require_arg(const void* p, const char* name) {
  if (!p) rashdrive::fail(rashdrive::ErrorCode::InvalidInput, std::string(name) + " must not be null");
}

rashdrive::PipelineSummary from_c(const rd_summary& s) {
  rashdrive::PipelineSummary out;
  out.frames = s.frames;
  out.pairs_processed = s.pairs_processed;
  out.rash_frames = s.rash_frames;
  out.partial = s.partial != 0;
  const std::pair<const char*, int> counts[] = {
      {"lane_change", s.lane_change_events}, {"wrong_direction", s.wrong_direction_events},
      {"proximity", s.proximity_events},     {"accel", s.accel_events},
      {"rash_verdict", s.rash_verdict_events}, {"error", s.error_events}};
  for (const auto& [type, count] : counts) {
    if (count > 0) out.events_by_type[type] = count;
  }
  return out;
}

rd_summary to_c(const rashdrive::PipelineSummary& s) {
  const auto count = [&](const char* type) {
    const auto it = s.events_by_type.find(type);
    return it == s.events_by_type.end() ? 0 : it->second;
  };
  rd_summary out{};
  out.frames = s.frames;
  out.pairs_processed = s.pairs_processed;
  out.rash_frames = s.rash_frames;
  out.lane_change_events = count("lane_change");
  out.wrong_direction_events = count("wrong_direction");
  out.proximity_events = count("proximity");
  out.accel_events = count("accel");
  out.rash_verdict_events = count("rash_verdict");
  out.error_events = count("error");
  out.partial = s.partial ? 1 : 0;
  return out;
}

}  // namespace

extern "C" {

const char* rd_status_string(rd_status status) {
  switch (status) {
    case RD_OK: return "ok";
    case RD_ERR_INVALID_INPUT: return "invalid-input";
    case RD_ERR_EMPTY_REGION: return "empty-region";
    case RD_ERR_BEHIND_CAMERA: return "behind-camera";
    case RD_ERR_HORIZON: return "horizon";
    case RD_ERR_NOT_ON_GROUND: return "not-on-ground";
    case RD_ERR_INSUFFICIENT_DATA: return "insufficient-data";
    case RD_ERR_NO_CONSENSUS: return "no-consensus";
    case RD_ERR_NO_LANE: return "no-lane";
    case RD_ERR_PARSE: return "parse";
    case RD_ERR_VALIDATION: return "validation";
    case RD_ERR_IO: return "io";
    case RD_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* rd_last_error(void) { return last_error.c_str(); }

rd_status rd_calibration_load(const char* path, rd_calibration** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    *out = nullptr;
    auto calib = std::make_unique<rd_calibration>();
    calib->value = rashdrive::load_calibration(path);
    *out = calib.release();
  });
}

void rd_calibration_free(rd_calibration* calib) { delete calib; }

rd_status rd_project_point(const rd_calibration* calib, double u, double v, double w, double* x, double* y) {
  return guarded([&] {
    require_arg(calib, "calib");
    require_arg(x, "x");
    require_arg(y, "y");
    const auto p = rashdrive::project_point({u, v, w}, calib->value);
    *x = p.x;
    *y = p.y;
  });
}

rd_status rd_backproject_ground(const rd_calibration* calib, double x, double y, double* u, double* w) {
  return guarded([&] {
    require_arg(calib, "calib");
    require_arg(u, "u");
    require_arg(w, "w");
    const auto p = rashdrive::backproject_ground({x, y}, calib->value);
    *u = p.u;
    *w = p.w;
  });
}

rd_status rd_distance_to_object(const rd_calibration* calib, double bbox_x, double bbox_y, double bbox_width,
                                double bbox_height, double class_offset, double* distance) {
  return guarded([&] {
    require_arg(calib, "calib");
    require_arg(distance, "distance");
    *distance = rashdrive::distance_to_object({bbox_x, bbox_y, bbox_width, bbox_height}, calib->value, class_offset);
  });
}

rd_status rd_config_create(rd_config** out) {
  return guarded([&] {
    require_arg(out, "out");
    *out = new rd_config{};
  });
}

rd_status rd_config_load(const char* path, rd_config** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    *out = nullptr;
    auto config = std::make_unique<rd_config>();
    config->value = rashdrive::load_config(path);
    *out = config.release();
  });
}

void rd_config_free(rd_config* config) { delete config; }

rd_status rd_config_set(rd_config* config, const char* key, const char* value) {
  return guarded([&] {
    require_arg(config, "config");
    require_arg(key, "key");
    require_arg(value, "value");
    rashdrive::PipelineConfig updated = config->value;
    updated.set(key, value);
    updated.validate();
    config->value = updated;
  });
}

rd_status rd_config_set_seed(rd_config* config, uint64_t seed) {
  return guarded([&] {
    require_arg(config, "config");
    config->value.seed = seed;
  });
}

rd_status rd_estimate_flow(const rd_config* config, const float* first, const float* second, int width,
                           int height, float* u_out, float* v_out) {
  return guarded([&] {
    require_arg(config, "config");
    require_arg(first, "first");
    require_arg(second, "second");
    require_arg(u_out, "u_out");
    require_arg(v_out, "v_out");
    rashdrive::require(width >= 1 && height >= 1, "frame dimensions must be positive");
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    const rashdrive::ImageF32 a(width, height, 1, std::vector<float>(first, first + n));
    const rashdrive::ImageF32 b(width, height, 1, std::vector<float>(second, second + n));
    const auto flow = rashdrive::estimate_flow(a, b, config->value.flow);
    std::memcpy(u_out, flow.u.data(), n * sizeof(float));
    std::memcpy(v_out, flow.v.data(), n * sizeof(float));
  });
}

rd_status rd_flow_dump(const rd_config* config, const char* first_path, const char* second_path,
                       const char* out_path) {
  return guarded([&] {
    require_arg(config, "config");
    require_arg(first_path, "first_path");
    require_arg(second_path, "second_path");
    require_arg(out_path, "out_path");
    auto a = rashdrive::read_pnm(first_path);
    auto b = rashdrive::read_pnm(second_path);
    if (a.channels() == 3) a = rashdrive::to_grayscale(a);
    if (b.channels() == 3) b = rashdrive::to_grayscale(b);
    rashdrive::write_flow(out_path, rashdrive::estimate_flow(a, b, config->value.flow));
  });
}

rd_status rd_analyze(const rd_config* config, const char* frames_dir, const char* calib_path,
                     const char* detections_path, const char* events_path, const char* overlay_dir,
                     rd_summary* summary) {
  return guarded([&] {
    require_arg(config, "config");
    require_arg(frames_dir, "frames_dir");
    require_arg(calib_path, "calib_path");
    require_arg(events_path, "events_path");
    rashdrive::PipelinePaths paths;
    paths.frames_dir = frames_dir;
    paths.calibration = calib_path;
    if (detections_path) paths.detections = detections_path;
    paths.events_out = events_path;
    if (overlay_dir) paths.overlay_dir = overlay_dir;
    const auto result = rashdrive::run_pipeline(config->value, paths);
    if (summary) *summary = to_c(result);
  });
}

size_t rd_summary_json(const rd_summary* summary, char* buf, size_t buf_size) {
  if (!summary) return 0;
  const std::string json = from_c(*summary).to_json();
  if (buf && buf_size > 0) {
    const std::size_t n = std::min(json.size(), buf_size - 1);
    std::memcpy(buf, json.data(), n);
    buf[n] = '\0';
  }
  return json.size();
}

}  // extern "C"
