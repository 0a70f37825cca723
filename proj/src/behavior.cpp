#include <algorithm>
#include <cmath>

#include "rashdrive/behavior.hpp"
#include "rashdrive/error.hpp"

namespace rashdrive {

void Thresholds::validate() const {
  require(forward_accel_max > 0.0, "thresholds.forward_accel_max must be positive");
  require(lateral_accel_max > 0.0, "thresholds.lateral_accel_max must be positive");
  require(wrong_direction_min > 0.0, "thresholds.wrong_direction_min must be positive");
  require(lane_changes_max > 0, "thresholds.lane_changes_max must be positive");
  require(window_seconds > 0.0, "thresholds.window_seconds must be positive");
  require(car_distance_min > 0.0, "thresholds.car_distance_min must be positive");
  require(person_distance_min > 0.0, "thresholds.person_distance_min must be positive");
  require(votes_required >= 1, "thresholds.votes_required must be at least 1");
}

double detect_wrong_direction(const FlowField& flow, const LaneModel& model, const Calibration& calib,
                              const BevSpec& bev, int expected_sign, double default_lane_width) {
  if (model.empty()) fail(ErrorCode::NoLane, "wrong-direction check needs at least one lane boundary");
  require(expected_sign == 1 || expected_sign == -1, "expected flow sign must be +1 or -1");
  require(flow.width == calib.image_width && flow.height == calib.image_height,
          "flow field does not match the calibrated frame size");

  std::size_t region = 0;
  std::size_t opposing = 0;
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      const auto ground = try_backproject_ground({static_cast<double>(x), static_cast<double>(y)}, calib);
      if (!ground || ground->w < bev.w_min || ground->w > bev.w_max) continue;
      bool inside = false;
      if (model.left && model.right) {
        inside = ground->u >= model.left->at(ground->w) && ground->u <= model.right->at(ground->w);
      } else {
        const Parabola& side = model.left ? *model.left : *model.right;
        inside = std::abs(ground->u - side.at(ground->w)) <= 0.5 * default_lane_width;
      }
      if (!inside) continue;
      ++region;
      const float v = flow.v[flow.index(x, y)];
      if (std::abs(v) > 0.5f && (v > 0.0f ? 1 : -1) != expected_sign) ++opposing;
    }
  }
  return region == 0 ? 0.0 : static_cast<double>(opposing) / static_cast<double>(region);
}

int count_lane_changes(const Track& track, const std::map<int, LaneModel>& model_history, int window,
                       const LaneChangeParams& params) {
  require(window >= 2, "lane-change window must span at least 2 frames");
  if (track.history.size() < 2) return 0;
  const int newest = track.history.back().frame_index;

  // -1 left of the lane, 0 inside, +1 right. Leaving a zone needs the offset to
  // clear the boundary by the hysteresis margin.
  int state = 0;
  bool started = false;
  int crossings = 0;
  for (const TrackEntry& entry : track.history) {
    if (entry.frame_index <= newest - window || !entry.lane_offset) continue;
    double half_width = 0.5 * params.default_lane_width;
    const auto model = model_history.find(entry.frame_index);
    if (model != model_history.end() && model->second.left && model->second.right && entry.ground) {
      half_width = 0.5 * (model->second.right->at(entry.ground->w) - model->second.left->at(entry.ground->w));
    }
    const double offset = *entry.lane_offset;
    if (!started) {
      state = offset > half_width ? 1 : (offset < -half_width ? -1 : 0);
      started = true;
      continue;
    }
    int next = state;
    if (state == 0) {
      if (offset > half_width + params.hysteresis) next = 1;
      else if (offset < -half_width - params.hysteresis) next = -1;
    } else if (state == 1) {
      if (offset < -half_width - params.hysteresis) next = -1;
      else if (offset < half_width - params.hysteresis) next = 0;
    } else {
      if (offset > half_width + params.hysteresis) next = 1;
      else if (offset > -half_width + params.hysteresis) next = 0;
    }
    crossings += std::abs(next - state);
    state = next;
  }
  return crossings;
}

namespace {

PixelRect to_pixel_rect(const BoundingBox& box) {
  const int x0 = static_cast<int>(std::floor(box.x));
  const int y0 = static_cast<int>(std::floor(box.y));
  const int x1 = static_cast<int>(std::ceil(box.x + box.width));
  const int y1 = static_cast<int>(std::ceil(box.y + box.height));
  return {x0, y0, x1 - x0, y1 - y0};
}

}  // namespace

FeatureResult compute_features(const FeatureInputs& in) {
  FeatureResult out;
  BehaviorFeatures& f = out.features;
  f.frame_index = in.frame_index;

  for (const Track& track : in.tracks) {
    if (!track.active || track.history.empty() || track.history.back().frame_index != in.frame_index) continue;
    const TrackEntry& now = track.history.back();

    if (now.distance) {
      double& nearest = track.cls == ObjectClass::Car ? f.min_car_distance : f.min_person_distance;
      if (*now.distance < nearest) {
        nearest = *now.distance;
        if (track.cls == ObjectClass::Car) f.closest_car_track = track.id;
      }
    }

    if (track.cls == ObjectClass::Car && in.flow) {
      FlowStats stats;
      try {
        stats = region_flow_stats(*in.flow, to_pixel_rect(now.bbox));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyRegion) throw;
        continue;
      }
      out.regions.push_back({track.id, stats.mean_u, stats.mean_v});
      const auto prev = std::find_if(in.previous_regions.begin(), in.previous_regions.end(),
                                     [&](const RegionSample& s) { return s.track_id == track.id; });
      if (prev != in.previous_regions.end()) {
        f.forward_accel_proxy = std::max(f.forward_accel_proxy, std::abs(stats.mean_v - prev->mean_v) * in.fps);
        f.lateral_accel_proxy = std::max(f.lateral_accel_proxy, std::abs(stats.mean_u - prev->mean_u) * in.fps);
      }
    }

    if (in.lane_history && in.lane_change_window >= 2) {
      const int changes = count_lane_changes(track, *in.lane_history, in.lane_change_window, in.lane_change);
      if (changes > f.lane_changes_in_window) {
        f.lane_changes_in_window = changes;
        f.lane_change_track = track.id;
      }
    }
  }

  if (in.lanes && !in.lanes->empty()) {
    f.departure_angle = departure_angle(*in.lanes, in.departure_evaluation_w);
    if (in.flow && in.calib && in.bev) {
      f.wrong_direction_score = detect_wrong_direction(*in.flow, *in.lanes, *in.calib, *in.bev,
                                                       in.expected_flow_sign,
                                                       in.lane_change.default_lane_width);
    }
  }
  return out;
}

Verdict classify_rash(const BehaviorFeatures& features, const Thresholds& th) {
  Verdict verdict;
  verdict.frame_index = features.frame_index;
  verdict.features = features;
  auto& rules = verdict.triggered_rules;
  if (features.forward_accel_proxy > th.forward_accel_max) rules.emplace_back(rule::kForwardAccel);
  if (features.lateral_accel_proxy > th.lateral_accel_max) rules.emplace_back(rule::kLateralAccel);
  if (features.wrong_direction_score >= th.wrong_direction_min) rules.emplace_back(rule::kWrongDirection);
  if (features.lane_changes_in_window >= th.lane_changes_max) rules.emplace_back(rule::kLaneChanges);
  if (features.min_car_distance < th.car_distance_min) rules.emplace_back(rule::kCarProximity);
  if (features.min_person_distance < th.person_distance_min) rules.emplace_back(rule::kPersonProximity);
  verdict.rash = static_cast<int>(rules.size()) >= th.votes_required;
  return verdict;
}

}  // namespace rashdrive
