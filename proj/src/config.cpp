#include "rashdrive/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "rashdrive/error.hpp"

namespace rashdrive {

namespace {

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) fail(ErrorCode::Parse, "config key '" + key + "': bad number '" + value + "'");
  return out;
}

long long to_integer(const std::string& key, const std::string& value) {
  long long out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) fail(ErrorCode::Parse, "config key '" + key + "': bad integer '" + value + "'");
  return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) fail(ErrorCode::Parse, "config key '" + key + "': bad unsigned '" + value + "'");
  return out;
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

Setter real(double PipelineConfig::*field) {
  return [field](PipelineConfig& c, const std::string& k, const std::string& v) { c.*field = to_double(k, v); };
}

template <typename Sub>
Setter real(Sub PipelineConfig::*sub, double Sub::*field) {
  return [sub, field](PipelineConfig& c, const std::string& k, const std::string& v) { c.*sub.*field = to_double(k, v); };
}

template <typename Sub, typename Int>
Setter integer(Sub PipelineConfig::*sub, Int Sub::*field) {
  return [sub, field](PipelineConfig& c, const std::string& k, const std::string& v) {
    const long long n = to_integer(k, v);
    if constexpr (std::is_unsigned_v<Int>) {
      if (n < 0) fail(ErrorCode::Parse, "config key '" + k + "' must be non-negative");
    }
    c.*sub.*field = static_cast<Int>(n);
  };
}

Setter integer(int PipelineConfig::*field) {
  return [field](PipelineConfig& c, const std::string& k, const std::string& v) {
    c.*field = static_cast<int>(to_integer(k, v));
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"fps", real(&PipelineConfig::fps)},
      {"seed", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.seed = to_unsigned(k, v); }},
      {"flow.lambda", real(&PipelineConfig::flow, &FlowParams::lambda)},
      {"flow.penalty_epsilon", real(&PipelineConfig::flow, &FlowParams::penalty_epsilon)},
      {"flow.pyramid_levels", integer(&PipelineConfig::flow, &FlowParams::pyramid_levels)},
      {"flow.downscale_factor", real(&PipelineConfig::flow, &FlowParams::downscale_factor)},
      {"flow.warps_per_level", integer(&PipelineConfig::flow, &FlowParams::warps_per_level)},
      {"flow.solver_iterations_per_warp", integer(&PipelineConfig::flow, &FlowParams::solver_iterations_per_warp)},
      {"flow.median_filter_radius", integer(&PipelineConfig::flow, &FlowParams::median_filter_radius)},
      {"bev.u_min", real(&PipelineConfig::bev, &BevSpec::u_min)},
      {"bev.u_max", real(&PipelineConfig::bev, &BevSpec::u_max)},
      {"bev.w_min", real(&PipelineConfig::bev, &BevSpec::w_min)},
      {"bev.w_max", real(&PipelineConfig::bev, &BevSpec::w_max)},
      {"bev.meters_per_pixel", real(&PipelineConfig::bev, &BevSpec::meters_per_pixel)},
      {"ransac.iterations", integer(&PipelineConfig::ransac, &RansacParams::iterations)},
      {"ransac.inlier_threshold", real(&PipelineConfig::ransac, &RansacParams::inlier_threshold)},
      {"ransac.min_inliers", integer(&PipelineConfig::ransac, &RansacParams::min_inliers)},
      {"lanes.sigma", real(&PipelineConfig::lanes, &LaneParams::sigma)},
      {"lanes.candidate_quantile", real(&PipelineConfig::lanes, &LaneParams::candidate_quantile)},
      {"lanes.min_response", real(&PipelineConfig::lanes, &LaneParams::min_response)},
      {"lanes.default_width", real(&PipelineConfig::lanes, &LaneParams::default_lane_width)},
      {"lanes.departure_evaluation_w", real(&PipelineConfig::departure_evaluation_w)},
      {"lanes.change_hysteresis", real(&PipelineConfig::lane_change_hysteresis)},
      {"hog.cell_size", integer(&PipelineConfig::hog, &HogParams::cell_size)},
      {"hog.bins", integer(&PipelineConfig::hog, &HogParams::bins)},
      {"hog.block_size", integer(&PipelineConfig::hog, &HogParams::block_size)},
      {"hog.block_stride", integer(&PipelineConfig::hog, &HogParams::block_stride)},
      {"hog.clip", real(&PipelineConfig::hog, &HogParams::clip)},
      {"thresholds.forward_accel_max", real(&PipelineConfig::thresholds, &Thresholds::forward_accel_max)},
      {"thresholds.lateral_accel_max", real(&PipelineConfig::thresholds, &Thresholds::lateral_accel_max)},
      {"thresholds.wrong_direction_min", real(&PipelineConfig::thresholds, &Thresholds::wrong_direction_min)},
      {"thresholds.lane_changes_max", integer(&PipelineConfig::thresholds, &Thresholds::lane_changes_max)},
      {"thresholds.window_seconds", real(&PipelineConfig::thresholds, &Thresholds::window_seconds)},
      {"thresholds.car_distance_min", real(&PipelineConfig::thresholds, &Thresholds::car_distance_min)},
      {"thresholds.person_distance_min", real(&PipelineConfig::thresholds, &Thresholds::person_distance_min)},
      {"thresholds.votes_required", integer(&PipelineConfig::thresholds, &Thresholds::votes_required)},
      {"detection.source",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         if (v == "internal-template") c.detection_source = DetectionSource::InternalTemplate;
         else if (v == "external-jsonl") c.detection_source = DetectionSource::ExternalJsonl;
         else fail(ErrorCode::Parse, "config key '" + k + "': unknown detection source '" + v + "'");
       }},
      {"detection.template", [](PipelineConfig& c, const std::string&, const std::string& v) { c.template_path = v; }},
      {"detection.template_class",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         const auto cls = parse_object_class(v);
         if (!cls) fail(ErrorCode::Parse, "config key '" + k + "': unknown class '" + v + "'");
         c.template_class = *cls;
       }},
      {"detection.score_threshold", real(&PipelineConfig::template_score_threshold)},
      {"detection.pyramid_levels", integer(&PipelineConfig::template_pyramid_levels)},
      {"tracking.iou_threshold", real(&PipelineConfig::track_iou_threshold)},
      {"tracking.max_gap", integer(&PipelineConfig::track_max_gap)},
      {"distance.offset.car", real(&PipelineConfig::car_distance_offset)},
      {"distance.offset.person", real(&PipelineConfig::person_distance_offset)},
      {"behavior.expected_flow_sign", integer(&PipelineConfig::expected_flow_sign)},
      {"overlay.flow_stride", integer(&PipelineConfig::overlay_flow_stride)},
  };
  return table;
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) fail(ErrorCode::Parse, "unknown config key '" + key + "'");
  it->second(*this, key, value);
}

void PipelineConfig::validate() const {
  require(fps > 0.0, "fps must be positive");
  flow.validate();
  bev.validate();
  ransac.validate();
  hog.validate();
  thresholds.validate();
  require(lanes.sigma > 0.0, "lanes.sigma must be positive");
  require(lanes.candidate_quantile >= 0.0 && lanes.candidate_quantile <= 1.0,
          "lanes.candidate_quantile must lie in [0,1]");
  require(lanes.default_lane_width > 0.0, "lanes.default_width must be positive");
  require(track_iou_threshold >= 0.0 && track_iou_threshold <= 1.0, "tracking.iou_threshold must lie in [0,1]");
  require(track_max_gap >= 0, "tracking.max_gap must be non-negative");
  require(expected_flow_sign == 1 || expected_flow_sign == -1, "behavior.expected_flow_sign must be +1 or -1");
  require(lane_change_hysteresis >= 0.0, "lanes.change_hysteresis must be non-negative");
  require(overlay_flow_stride >= 1, "overlay.flow_stride must be at least 1");
  require(template_pyramid_levels >= 1, "detection.pyramid_levels must be at least 1");
  if (detection_source == DetectionSource::InternalTemplate) {
    require(!template_path.empty(), "detection.template is required for the internal-template source");
  }
}

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  PipelineConfig config;
  for (const auto& [key, value] : parse_key_values(text)) config.set(key, value);
  if (!config.template_path.empty() && config.template_path.is_relative() && !base_dir.empty()) {
    config.template_path = base_dir / config.template_path;
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index) noexcept {
  // FNV-1a over the stream name, then splitmix64 finalization.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  std::uint64_t z = seed ^ h ^ (index * 0x9E3779B97F4A7C15ull);
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace rashdrive
