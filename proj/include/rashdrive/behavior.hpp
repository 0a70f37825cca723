#pragma once

#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rashdrive/detection.hpp"
#include "rashdrive/flow.hpp"
#include "rashdrive/geometry.hpp"
#include "rashdrive/lanes.hpp"

namespace rashdrive {

inline constexpr double kNoDistance = std::numeric_limits<double>::infinity();

struct BehaviorFeatures {
  int frame_index = 0;
  double forward_accel_proxy = 0.0;  // |change of mean v| in car regions, times fps
  double lateral_accel_proxy = 0.0;  // |change of mean u| in car regions, times fps
  double wrong_direction_score = 0.0;
  int lane_changes_in_window = 0;
  double min_car_distance = kNoDistance;
  double min_person_distance = kNoDistance;
  double departure_angle = 0.0;
  int closest_car_track = -1;
  int lane_change_track = -1;
};

struct Thresholds {
  double forward_accel_max = 40.0;
  double lateral_accel_max = 25.0;
  double wrong_direction_min = 0.6;
  int lane_changes_max = 2;
  double window_seconds = 5.0;
  double car_distance_min = 5.0;
  double person_distance_min = 8.0;
  int votes_required = 1;

  void validate() const;
};

namespace rule {
inline constexpr const char* kForwardAccel = "forward_accel";
inline constexpr const char* kLateralAccel = "lateral_accel";
inline constexpr const char* kWrongDirection = "wrong_direction";
inline constexpr const char* kLaneChanges = "lane_changes";
inline constexpr const char* kCarProximity = "car_proximity";
inline constexpr const char* kPersonProximity = "person_proximity";
}  // namespace rule

struct Verdict {
  int frame_index = 0;
  bool rash = false;
  std::vector<std::string> triggered_rules;
  BehaviorFeatures features;
};

// Fraction of lane-region pixels whose vertical flow opposes `expected_sign`
// with magnitude above 0.5 px. Pixels count as lane region when their road
// back-projection lies between the boundaries (or within half a lane width of
// a lone boundary) and inside the BEV's forward range.
double detect_wrong_direction(const FlowField& flow, const LaneModel& model, const Calibration& calib,
                              const BevSpec& bev, int expected_sign, double default_lane_width = 3.6);

struct LaneChangeParams {
  double default_lane_width = 3.6;
  double hysteresis = 0.3;
};

// Boundary crossings of the track's lane offset inside the trailing window of
// `window` frames (ending at the track's last entry).
int count_lane_changes(const Track& track, const std::map<int, LaneModel>& model_history, int window,
                       const LaneChangeParams& params = {});

struct RegionSample {
  int track_id = 0;
  double mean_u = 0.0;
  double mean_v = 0.0;
};

struct FeatureInputs {
  int frame_index = 0;
  double fps = 30.0;
  const FlowField* flow = nullptr;
  const LaneModel* lanes = nullptr;
  const Calibration* calib = nullptr;
  const BevSpec* bev = nullptr;
  std::span<const Track> tracks;
  const std::map<int, LaneModel>* lane_history = nullptr;
  std::span<const RegionSample> previous_regions;  // car-region means of the previous pair
  int lane_change_window = 150;                    // frames
  int expected_flow_sign = 1;
  double departure_evaluation_w = 10.0;
  LaneChangeParams lane_change;
};

struct FeatureResult {
  BehaviorFeatures features;
  std::vector<RegionSample> regions;  // feed back as previous_regions next time
};

FeatureResult compute_features(const FeatureInputs& in);

Verdict classify_rash(const BehaviorFeatures& features, const Thresholds& thresholds);

}  // namespace rashdrive
