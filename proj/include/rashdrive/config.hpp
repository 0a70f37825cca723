#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "rashdrive/behavior.hpp"
#include "rashdrive/detection.hpp"
#include "rashdrive/flow.hpp"
#include "rashdrive/geometry.hpp"
#include "rashdrive/lanes.hpp"

namespace rashdrive {

enum class DetectionSource { InternalTemplate, ExternalJsonl };

struct PipelineConfig {
  double fps = 30.0;
  FlowParams flow;
  BevSpec bev;
  RansacParams ransac;
  LaneParams lanes;
  HogParams hog;
  Thresholds thresholds;
  DetectionSource detection_source = DetectionSource::ExternalJsonl;
  std::uint64_t seed = 0;

  // Internal detector: template file (relative paths resolve against the
  // config file's directory), its class and the acceptance score.
  std::filesystem::path template_path;
  ObjectClass template_class = ObjectClass::Car;
  double template_score_threshold = 0.0;
  int template_pyramid_levels = 3;

  double track_iou_threshold = 0.3;
  int track_max_gap = 5;
  double car_distance_offset = 0.0;
  double person_distance_offset = 0.0;
  int expected_flow_sign = 1;
  double departure_evaluation_w = 10.0;
  double lane_change_hysteresis = 0.3;
  int overlay_flow_stride = 16;

  void validate() const;

  // Applies one dotted `key = value` setting; unknown keys are rejected.
  void set(const std::string& key, const std::string& value);
};

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

// Per-module random stream: a stable mix of the run seed, a stream name and an index.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) noexcept;

}  // namespace rashdrive
