#include <doctest.h>

#include <cmath>
#include <random>

#include "rashdrive/behavior.hpp"
#include "rashdrive/error.hpp"
#include "support/scenes.hpp"

using namespace rashdrive;

namespace {

LaneModel straight(double half = 1.8) {
  LaneModel m;
  m.left = Parabola{0, 0, -half};
  m.right = Parabola{0, 0, half};
  return m;
}

Track offsets_track(const std::vector<double>& offsets) {
  Track t;
  t.id = 1;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    TrackEntry e;
    e.frame_index = static_cast<int>(i);
    e.lane_offset = offsets[i];
    t.history.push_back(e);
  }
  t.last_seen = static_cast<int>(offsets.size()) - 1;
  return t;
}

}  // namespace

TEST_CASE("wrong-direction score") {
  const Calibration calib = rdtest::camera(160, 120, 140, 1.3, 0.15);
  const BevSpec bev{-5, 5, 4, 30, 0.1};
  const LaneModel lanes = straight();
  CHECK(detect_wrong_direction(FlowField(160, 120), lanes, calib, bev, 1) == 0.0);

  const FlowField down(160, 120, 0.0f, 2.0f);
  CHECK(detect_wrong_direction(down, lanes, calib, bev, -1) == doctest::Approx(1.0));
  CHECK(detect_wrong_direction(down, lanes, calib, bev, 1) == 0.0);

  // Slow opposing motion is ignored.
  CHECK(detect_wrong_direction(FlowField(160, 120, 0.0f, -0.4f), lanes, calib, bev, 1) == 0.0);

  LaneModel left_only;
  left_only.left = Parabola{0, 0, -1.8};
  CHECK(detect_wrong_direction(down, left_only, calib, bev, -1) == doctest::Approx(1.0));

  CHECK_THROWS_AS(detect_wrong_direction(down, LaneModel{}, calib, bev, 1), Error);
  CHECK_THROWS_AS(detect_wrong_direction(FlowField(10, 10), lanes, calib, bev, 1), Error);
}

TEST_CASE("lane-change counting") {
  const std::map<int, LaneModel> none;
  CHECK(count_lane_changes(offsets_track({0, 0, 0, 0}), none, 10) == 0);
  CHECK(count_lane_changes(offsets_track({0}), none, 10) == 0);

  const Track weave = offsets_track({0.0, 1.0, 2.2, 1.0, 0.0});
  CHECK(count_lane_changes(weave, none, 10) == 2);
  CHECK(count_lane_changes(weave, none, 3) == 1);

  // Jitter around the boundary stays inside the hysteresis band.
  CHECK(count_lane_changes(offsets_track({1.7, 1.95, 1.7, 2.0, 1.6}), none, 10) == 0);

  // Boundaries from the per-frame model take precedence over the default width.
  Track narrow = offsets_track({0.0, 1.8, 0.0});
  std::map<int, LaneModel> models;
  for (TrackEntry& e : narrow.history) {
    e.ground = WorldPoint{*e.lane_offset, 0.0, 12.0};
    models[e.frame_index] = straight(1.2);
  }
  CHECK(count_lane_changes(narrow, models, 10) == 2);
  CHECK(count_lane_changes(narrow, none, 10) == 0);

  CHECK_THROWS_AS(count_lane_changes(weave, none, 1), Error);
}

TEST_CASE("feature assembly") {
  FeatureInputs empty;
  const BehaviorFeatures neutral = compute_features(empty).features;
  CHECK(neutral.forward_accel_proxy == 0.0);
  CHECK(neutral.wrong_direction_score == 0.0);
  CHECK(neutral.lane_changes_in_window == 0);
  CHECK(std::isinf(neutral.min_car_distance));
  CHECK(std::isinf(neutral.min_person_distance));
  CHECK(neutral.departure_angle == 0.0);

  Track car;
  car.id = 4;
  car.history.push_back({1, {10, 10, 20, 20}, WorldPoint{0, 0, 6}, 6.0, 0.0});
  car.last_seen = 1;
  const FlowField slow(64, 64, 0.0f, 1.0f);
  FeatureInputs first;
  first.frame_index = 1;
  first.fps = 30.0;
  first.flow = &slow;
  std::vector<Track> tracks{car};
  first.tracks = tracks;
  const FeatureResult r1 = compute_features(first);
  CHECK(r1.features.min_car_distance == 6.0);
  CHECK(r1.features.closest_car_track == 4);
  CHECK(r1.features.forward_accel_proxy == 0.0);
  REQUIRE(r1.regions.size() == 1);
  CHECK(r1.regions[0].mean_v == doctest::Approx(1.0));

  tracks[0].history.push_back({2, {11, 10, 20, 20}, WorldPoint{0, 0, 6}, 6.0, 0.0});
  tracks[0].last_seen = 2;
  const FlowField fast(64, 64, 0.0f, 3.0f);
  FeatureInputs second = first;
  second.frame_index = 2;
  second.flow = &fast;
  second.tracks = tracks;
  second.previous_regions = r1.regions;
  const BehaviorFeatures f2 = compute_features(second).features;
  CHECK(f2.forward_accel_proxy == doctest::Approx(60.0));
  CHECK(f2.lateral_accel_proxy == doctest::Approx(0.0));
}

TEST_CASE("rule votes") {
  const Thresholds th;
  const Verdict calm = classify_rash(BehaviorFeatures{}, th);
  CHECK_FALSE(calm.rash);
  CHECK(calm.triggered_rules.empty());

  BehaviorFeatures f;
  f.lane_changes_in_window = 3;
  f.min_car_distance = 2.0;
  Thresholds two = th;
  two.votes_required = 2;
  const Verdict v = classify_rash(f, two);
  CHECK(v.rash);
  CHECK(v.triggered_rules == std::vector<std::string>{rule::kLaneChanges, rule::kCarProximity});

  Thresholds three = th;
  three.votes_required = 3;
  CHECK_FALSE(classify_rash(f, three).rash);

  Thresholds bad = th;
  bad.votes_required = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("more extreme features never calm a rash verdict") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Thresholds th;
  th.votes_required = 2;
  for (int i = 0; i < 200; ++i) {
    BehaviorFeatures f;
    f.forward_accel_proxy = 80 * unit(rng);
    f.lateral_accel_proxy = 50 * unit(rng);
    f.wrong_direction_score = unit(rng);
    f.lane_changes_in_window = static_cast<int>(5 * unit(rng));
    f.min_car_distance = 20 * unit(rng);
    f.min_person_distance = 20 * unit(rng);
    BehaviorFeatures g = f;
    g.forward_accel_proxy += 10 * unit(rng);
    g.lane_changes_in_window += 1;
    g.min_person_distance *= unit(rng);
    if (classify_rash(f, th).rash) CHECK(classify_rash(g, th).rash);
  }
}
