#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "rashdrive/error.hpp"
#include "rashdrive/lanes.hpp"
#include "support/scenes.hpp"

using namespace rashdrive;

namespace {

ImageF32 stripe_image(int w, int h, double angle_deg, double half_width = 1.5) {
  // Bright band through the centre; angle 0 is vertical.
  const double a = angle_deg * M_PI / 180.0;
  const double nx = std::cos(a), ny = std::sin(a);
  ImageF32 img(w, h, 1, 0.2f);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = (x - 0.5 * (w - 1)) * nx + (y - 0.5 * (h - 1)) * ny;
      if (std::abs(d) <= half_width) img.at(x, y) = 0.9f;
    }
  }
  return img;
}

std::vector<GroundSample> noisy_parabola(std::mt19937_64& rng, const Parabola& p, int count, double outlier_share,
                                         std::vector<bool>* is_inlier = nullptr) {
  std::uniform_real_distribution<double> w_dist(5.0, 40.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<GroundSample> pts;
  for (int i = 0; i < count; ++i) {
    const double w = w_dist(rng);
    const bool outlier = coin(rng) < outlier_share;
    const double base = p.at(w);
    const double u = outlier ? base + (coin(rng) < 0.5 ? -1 : 1) * (0.5 + 5.0 * coin(rng)) : base + noise(rng);
    pts.push_back({w, u});
    if (is_inlier) is_inlier->push_back(!outlier);
  }
  return pts;
}

}  // namespace

TEST_CASE("lane response on stripes") {
  const ImageF32 flat = lane_pixel_response(ImageF32(40, 40, 1, 0.5f));
  for (float v : flat.data()) CHECK(v == 0.0f);

  const ImageF32 stripe = stripe_image(41, 60, 0.0);
  const ImageF32 r = lane_pixel_response(stripe);
  float peak = 0.0f;
  for (float v : r.data()) peak = std::max(peak, v);
  CHECK(peak == doctest::Approx(1.0f));

  std::vector<std::pair<float, int>> ranked;
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) ranked.emplace_back(r.at(x, y), x);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const std::size_t top = ranked.size() / 10;
  std::size_t near = 0;
  for (std::size_t i = 0; i < top; ++i) near += std::abs(ranked[i].second - 20) <= 3 ? 1 : 0;  // stripe 19..21 plus 2 px
  CHECK(static_cast<double>(near) >= 0.8 * static_cast<double>(top));

  const ImageF32 tilted = stripe_image(41, 60, 45.0);
  const double vertical_on = std::abs(steerable_filter_response(stripe, 2, 0.0).at(20, 30));
  const double tilted_on = std::abs(steerable_filter_response(tilted, 2, 0.0).at(20, 30));
  CHECK(tilted_on < vertical_on);
}

TEST_CASE("parabola fitting") {
  const Parabola truth{0.01, 0.5, 10.0};
  std::vector<GroundSample> three;
  for (double w : {5.0, 17.0, 31.0}) three.push_back({w, truth.at(w)});
  RansacParams params;
  params.min_inliers = 3;
  const RansacResult exact = ransac_parabola(three, params);
  CHECK(exact.model.a == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(exact.model.b == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(exact.model.c == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(exact.inliers.size() == 3);

  const Parabola ls = fit_parabola(three);
  CHECK(ls.a == doctest::Approx(0.01).epsilon(1e-9));

  try {
    ransac_parabola({three[0], three[1]}, params);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientData);
  }
}

TEST_CASE("ransac with outliers") {
  const Parabola truth{0.01, 0.5, 10.0};
  std::mt19937_64 rng(99);
  std::vector<bool> inlier;
  const auto pts = noisy_parabola(rng, truth, 100, 0.3, &inlier);
  RansacParams params;
  params.iterations = 500;
  params.inlier_threshold = 0.15;
  params.seed = 1234;
  const RansacResult fit = ransac_parabola(pts, params);

  // Reference: least squares on the true inliers.
  std::vector<GroundSample> clean;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (inlier[i]) clean.push_back(pts[i]);
  }
  const Parabola ref = fit_parabola(clean);
  CHECK(std::abs(ref.a - truth.a) < 0.002);
  CHECK(std::abs(fit.model.a - truth.a) < 0.002);
  CHECK(std::abs(fit.model.b - truth.b) < 0.05);
  CHECK(std::abs(fit.model.c - truth.c) < 0.3);

  const RansacResult again = ransac_parabola(pts, params);
  CHECK(std::memcmp(&again.model, &fit.model, sizeof(Parabola)) == 0);
  CHECK(again.inliers == fit.inliers);

  RansacParams strict = params;
  strict.min_inliers = 90;
  try {
    ransac_parabola(pts, strict);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConsensus);
  }
}

TEST_CASE("departure angle") {
  LaneModel straight;
  straight.left = Parabola{0, 0, -1.8};
  straight.right = Parabola{0, 0, 1.8};
  CHECK(departure_angle(straight, 10.0) == 0.0);

  LaneModel one;
  one.left = Parabola{0, 0.1, -1.8};
  CHECK(departure_angle(one, 3.0) == doctest::Approx(-std::atan(0.1)));
  CHECK(departure_angle(one, 30.0) == doctest::Approx(-0.0997).epsilon(1e-3));

  try {
    departure_angle(LaneModel{}, 10.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoLane);
  }
}

TEST_CASE("lane assignment") {
  LaneModel m;
  m.left = Parabola{0, 0, -1.8};
  m.right = Parabola{0, 0, 1.8};
  LaneAssignment a = assign_lane(0.0, m, 10.0);
  CHECK(a.offset == 0.0);
  CHECK(a.zone == LaneZone::InLane);

  a = assign_lane(2.5, m, 10.0);
  CHECK(a.offset == doctest::Approx(2.5));
  CHECK(a.zone == LaneZone::RightOfLane);
  CHECK(assign_lane(-2.0, m, 10.0).zone == LaneZone::LeftOfLane);

  LaneModel left_only;
  left_only.left = Parabola{0, 0, -1.8};
  a = assign_lane(0.0, left_only, 10.0, 3.6);
  CHECK(a.offset == doctest::Approx(0.0));
  CHECK(a.zone == LaneZone::InLane);

  LaneModel right_only;
  right_only.right = Parabola{0, 0, 1.8};
  CHECK(assign_lane(-1.0, right_only, 10.0, 3.6).offset == doctest::Approx(-1.0));
  CHECK_THROWS_AS(assign_lane(0.0, LaneModel{}, 10.0), Error);
  CHECK(std::string(to_string(LaneZone::RightOfLane)) == "right-of-lane");
}

TEST_CASE("lane detection on rendered roads") {
  const Calibration calib = rdtest::camera(320, 240, 250, 1.5, 0.12);
  BevSpec bev;
  bev.u_min = -5;
  bev.u_max = 5;
  bev.w_min = 5;
  bev.w_max = 25;
  RansacParams ransac;
  ransac.seed = 17;

  const LaneModel empty = detect_lanes(ImageF32(320, 240, 3, 0.4f), calib, bev, ransac);
  CHECK(empty.empty());

  const LaneModel m = detect_lanes(rdtest::render_road(calib, rdtest::straight_lanes()), calib, bev, ransac);
  REQUIRE(m.left.has_value());
  REQUIRE(m.right.has_value());
  CHECK(m.left->c == doctest::Approx(-1.8).epsilon(0.2 / 1.8));
  CHECK(m.right->c == doctest::Approx(1.8).epsilon(0.2 / 1.8));
  CHECK(std::abs(m.left->a) < 0.002);
  CHECK(std::abs(m.right->b) < 0.05);
  CHECK(m.right->c > m.left->c);

  const LaneModel again = detect_lanes(rdtest::render_road(calib, rdtest::straight_lanes()), calib, bev, ransac);
  CHECK(std::memcmp(&*again.left, &*m.left, sizeof(Parabola)) == 0);
}
