#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rashdrive/geometry.hpp"
#include "rashdrive/image.hpp"

namespace rashdrive {

// Lateral position of a lane boundary as a function of forward distance:
// u(w) = a w^2 + b w + c, all in road coordinates (meters).
struct Parabola {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double at(double w) const noexcept { return (a * w + b) * w + c; }
  double slope(double w) const noexcept { return 2.0 * a * w + b; }
};

struct LaneModel {
  std::optional<Parabola> left;
  std::optional<Parabola> right;
  std::size_t inlier_count_left = 0;
  std::size_t inlier_count_right = 0;
  int frame_index = 0;

  bool empty() const noexcept { return !left && !right; }
};

struct RansacParams {
  int iterations = 200;
  double inlier_threshold = 0.15;
  std::size_t min_inliers = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GroundSample {
  double w = 0.0;
  double u = 0.0;
};

struct RansacResult {
  Parabola model;
  std::vector<std::size_t> inliers;
};

RansacResult ransac_parabola(const std::vector<GroundSample>& points, const RansacParams& params);

// Least-squares parabola through the given samples (at least 3 distinct w).
Parabola fit_parabola(const std::vector<GroundSample>& points);

struct LaneParams {
  double sigma = 2.0;             // steerable filter scale, BEV pixels
  double candidate_quantile = 0.98;
  double min_response = 0.1;
  double default_lane_width = 3.6;
};

// Ridge strength of bright, roughly vertical lane paint in a single-channel
// BEV raster, normalized to [0,1].
ImageF32 lane_pixel_response(const ImageF32& bev, double sigma = 2.0);

LaneModel detect_lanes(const ImageF32& frame, const Calibration& calib, const BevSpec& bev,
                       const RansacParams& ransac, const LaneParams& params = {});

// Angle of the ego heading (+w) relative to the lane direction at
// `evaluation_w`, averaged over the boundaries present.
double departure_angle(const LaneModel& model, double evaluation_w);

enum class LaneZone { LeftOfLane, InLane, RightOfLane };

struct LaneAssignment {
  double offset = 0.0;  // meters right of the lane centre
  LaneZone zone = LaneZone::InLane;
  double left_boundary = 0.0;
  double right_boundary = 0.0;
};

LaneAssignment assign_lane(double ground_u, const LaneModel& model, double at_w,
                           double default_lane_width = 3.6);

const char* to_string(LaneZone zone) noexcept;

}  // namespace rashdrive
