#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "rashdrive/error.hpp"
#include "rashdrive/lanes.hpp"

namespace rashdrive {

void RansacParams::validate() const {
  require(iterations >= 1, "ransac.iterations must be at least 1");
  require(inlier_threshold > 0.0, "ransac.inlier_threshold must be positive");
}

Parabola fit_parabola(const std::vector<GroundSample>& points) {
  if (points.size() < 3) fail(ErrorCode::InsufficientData, "a parabola needs at least 3 points");
  // Centre and scale w so the design matrix stays well conditioned.
  double mean = 0.0;
  for (const auto& p : points) mean += p.w;
  mean /= static_cast<double>(points.size());
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, std::abs(p.w - mean));
  if (scale == 0.0) fail(ErrorCode::InsufficientData, "parabola samples share a single w");

  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = (points[static_cast<std::size_t>(i)].w - mean) / scale;
    design(i, 0) = t * t;
    design(i, 1) = t;
    design(i, 2) = 1.0;
    rhs(i) = points[static_cast<std::size_t>(i)].u;
  }
  const auto qr = design.colPivHouseholderQr();
  if (qr.rank() < 3) fail(ErrorCode::InsufficientData, "parabola samples are degenerate");
  const Eigen::Vector3d k = qr.solve(rhs);
  const double s2 = scale * scale;
  return {k(0) / s2, k(1) / scale - 2.0 * k(0) * mean / s2,
          k(0) * mean * mean / s2 - k(1) * mean / scale + k(2)};
}

RansacResult ransac_parabola(const std::vector<GroundSample>& points, const RansacParams& params) {
  params.validate();
  if (points.size() < 3) fail(ErrorCode::InsufficientData, "RANSAC needs at least 3 points");

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  std::vector<std::size_t> best;
  std::vector<std::size_t> current;
  for (int it = 0; it < params.iterations; ++it) {
    const std::size_t i0 = pick(rng);
    std::size_t i1 = pick(rng);
    while (i1 == i0) i1 = pick(rng);
    std::size_t i2 = pick(rng);
    while (i2 == i0 || i2 == i1) i2 = pick(rng);
    const double w0 = points[i0].w, w1 = points[i1].w, w2 = points[i2].w;
    if (std::abs(w0 - w1) < 1e-9 || std::abs(w0 - w2) < 1e-9 || std::abs(w1 - w2) < 1e-9) continue;

    const Parabola candidate = fit_parabola({points[i0], points[i1], points[i2]});
    current.clear();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (std::abs(points[i].u - candidate.at(points[i].w)) <= params.inlier_threshold) current.push_back(i);
    }
    if (current.size() > best.size()) best.swap(current);
  }
  if (best.size() < std::max<std::size_t>(params.min_inliers, 3)) {
    fail(ErrorCode::NoConsensus, "RANSAC found " + std::to_string(best.size()) + " inliers, fewer than required");
  }
  std::vector<GroundSample> inliers;
  inliers.reserve(best.size());
  for (std::size_t i : best) inliers.push_back(points[i]);
  return {fit_parabola(inliers), std::move(best)};
}

namespace {

constexpr double kSteeringAngles[] = {-15.0 * std::numbers::pi / 180.0, 0.0,
                                      15.0 * std::numbers::pi / 180.0};

ImageF32 raw_lane_response(const ImageF32& bev, double sigma) {
  require(bev.channels() == 1, "lane_pixel_response expects a single-channel BEV");
  const SteerableBasis second(bev, 2, sigma);
  const SteerableBasis fourth(bev, 4, sigma);
  ImageF32 out(bev.width(), bev.height(), 1);
  for (double angle : kSteeringAngles) {
    const ImageF32 r2 = second.steer(angle);
    const ImageF32 r4 = fourth.steer(angle);
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      const float combined = 0.5f * (std::abs(r2.data()[i]) + std::abs(r4.data()[i]));
      dst[i] = std::max(dst[i], combined);
    }
  }
  return out;
}

void normalize_response(ImageF32& response) {
  auto data = response.data();
  const float peak = *std::max_element(data.begin(), data.end());
  // Responses this small are rounding noise on a flat input.
  if (!(peak > 1e-5f)) {
    std::fill(data.begin(), data.end(), 0.0f);
    return;
  }
  for (float& v : data) v /= peak;
}

ImageF32 erode(const ImageF32& mask, int radius) {
  ImageF32 out(mask.width(), mask.height(), 1);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      bool inside = true;
      for (int dy = -radius; dy <= radius && inside; ++dy) {
        for (int dx = -radius; dx <= radius && inside; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= mask.width() || yy >= mask.height()) continue;
          inside = mask.at(xx, yy) > 0.5f;
        }
      }
      out.at(x, y) = inside ? 1.0f : 0.0f;
    }
  }
  return out;
}

std::optional<RansacResult> try_fit(const std::vector<GroundSample>& points, const RansacParams& params) {
  try {
    return ransac_parabola(points, params);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InsufficientData || e.code() == ErrorCode::NoConsensus) return std::nullopt;
    throw;
  }
}

}  // namespace

ImageF32 lane_pixel_response(const ImageF32& bev, double sigma) {
  ImageF32 response = raw_lane_response(bev, sigma);
  normalize_response(response);
  return response;
}

LaneModel detect_lanes(const ImageF32& frame, const Calibration& calib, const BevSpec& bev,
                       const RansacParams& ransac, const LaneParams& params) {
  calib.validate();
  bev.validate();
  ransac.validate();
  ImageF32 lightness;
  if (frame.channels() == 3) {
    lightness = rgb_to_lab(frame).channel(0);
    for (float& v : lightness.data()) v /= 100.0f;
  } else {
    lightness = frame;
  }

  const ImageF32 top_view = inverse_perspective_map(lightness, calib, bev);
  const int radius = static_cast<int>(std::ceil(5.0 * params.sigma));
  const ImageF32 valid = erode(inverse_perspective_mask(calib, bev), radius);
  ImageF32 response = raw_lane_response(top_view, params.sigma);
  for (std::size_t i = 0; i < response.data().size(); ++i) {
    if (valid.data()[i] < 0.5f) response.data()[i] = 0.0f;
  }
  normalize_response(response);

  std::vector<float> values;
  for (std::size_t i = 0; i < response.data().size(); ++i) {
    if (valid.data()[i] > 0.5f) values.push_back(response.data()[i]);
  }
  LaneModel model;
  if (values.empty()) return model;
  const auto rank = static_cast<std::size_t>(
      std::clamp(params.candidate_quantile, 0.0, 1.0) * static_cast<double>(values.size() - 1));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank), values.end());
  const double threshold = std::max<double>(values[rank], params.min_response);

  const double midline = 0.5 * (bev.u_min + bev.u_max);
  std::vector<GroundSample> left, right;
  for (int row = 0; row < response.height(); ++row) {
    for (int col = 0; col < response.width(); ++col) {
      const float r = response.at(col, row);
      if (r <= 0.0f || r < threshold) continue;
      const GroundSample s{bev.w_at(row), bev.u_at(col)};
      (s.u < midline ? left : right).push_back(s);
    }
  }

  RansacParams right_params = ransac;
  right_params.seed = ransac.seed ^ 0x9E3779B97F4A7C15ull;
  if (auto fit = try_fit(left, ransac)) {
    model.left = fit->model;
    model.inlier_count_left = fit->inliers.size();
  }
  if (auto fit = try_fit(right, right_params)) {
    model.right = fit->model;
    model.inlier_count_right = fit->inliers.size();
  }
  if (model.left && model.right && !(model.right->c > model.left->c)) {
    // Crossed fits: keep the better-supported side only.
    if (model.inlier_count_left >= model.inlier_count_right) {
      model.right.reset();
      model.inlier_count_right = 0;
    } else {
      model.left.reset();
      model.inlier_count_left = 0;
    }
  }
  return model;
}

double departure_angle(const LaneModel& model, double evaluation_w) {
  if (model.empty()) fail(ErrorCode::NoLane, "departure angle needs at least one lane boundary");
  double sum = 0.0;
  int count = 0;
  for (const auto& side : {model.left, model.right}) {
    if (!side) continue;
    sum += std::atan(side->slope(evaluation_w));
    ++count;
  }
  return -sum / count;
}

LaneAssignment assign_lane(double ground_u, const LaneModel& model, double at_w,
                           double default_lane_width) {
  if (model.empty()) fail(ErrorCode::NoLane, "lane assignment needs at least one lane boundary");
  LaneAssignment out;
  if (model.left && model.right) {
    out.left_boundary = model.left->at(at_w);
    out.right_boundary = model.right->at(at_w);
  } else if (model.left) {
    out.left_boundary = model.left->at(at_w);
    out.right_boundary = out.left_boundary + default_lane_width;
  } else {
    out.right_boundary = model.right->at(at_w);
    out.left_boundary = out.right_boundary - default_lane_width;
  }
  out.offset = ground_u - 0.5 * (out.left_boundary + out.right_boundary);
  if (ground_u < out.left_boundary) {
    out.zone = LaneZone::LeftOfLane;
  } else if (ground_u > out.right_boundary) {
    out.zone = LaneZone::RightOfLane;
  } else {
    out.zone = LaneZone::InLane;
  }
  return out;
}

const char* to_string(LaneZone zone) noexcept {
  switch (zone) {
    case LaneZone::LeftOfLane: return "left-of-lane";
    case LaneZone::InLane: return "in-lane";
    case LaneZone::RightOfLane: return "right-of-lane";
  }
  return "unknown";
}

}  // namespace rashdrive
