#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rashdrive/error.hpp"
#include "rashdrive/geometry.hpp"

namespace rashdrive {

namespace {

constexpr double kMinDepth = 1e-9;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<double> parse_numbers(const std::string& key, const std::string& value,
                                  std::size_t expected) {
  std::istringstream in(value);
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    double number = 0.0;
    try {
      number = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) fail(ErrorCode::Parse, "calibration key '" + key + "': bad number '" + token + "'");
    out.push_back(number);
  }
  if (out.size() != expected) {
    fail(ErrorCode::Parse, "calibration key '" + key + "' expects " + std::to_string(expected) +
                               " value(s), got " + std::to_string(out.size()));
  }
  return out;
}

}  // namespace

void Calibration::validate() const {
  require(intrinsics.phi_x > 0.0 && intrinsics.phi_y > 0.0, "focal lengths must be positive");
  require(image_width >= 1 && image_height >= 1, "calibration image size must be positive");
  const auto& e = extrinsics;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += e.rot(k, a) * e.rot(k, b);
      require(std::abs(dot - (a == b ? 1.0 : 0.0)) <= 1e-6, "rotation matrix is not orthonormal");
    }
  }
  const double det = e.rot(0, 0) * (e.rot(1, 1) * e.rot(2, 2) - e.rot(1, 2) * e.rot(2, 1)) -
                     e.rot(0, 1) * (e.rot(1, 0) * e.rot(2, 2) - e.rot(1, 2) * e.rot(2, 0)) +
                     e.rot(0, 2) * (e.rot(1, 0) * e.rot(2, 1) - e.rot(1, 1) * e.rot(2, 0));
  require(std::abs(det - 1.0) <= 1e-6, "rotation matrix determinant must be 1");
}

Calibration Calibration::from_pose(const Intrinsics& intrinsics, double height, double pitch,
                                   int image_width, int image_height) {
  const double c = std::cos(pitch);
  const double s = std::sin(pitch);
  Calibration calib;
  calib.intrinsics = intrinsics;
  calib.extrinsics.omega = {1, 0, 0, 0, c, -s, 0, s, c};
  calib.extrinsics.tau = {0.0, height * c, height * s};
  calib.image_width = image_width;
  calib.image_height = image_height;
  return calib;
}

void BevSpec::validate() const {
  require(u_max > u_min, "bev.u_max must exceed bev.u_min");
  require(w_min > 0.0 && w_max > w_min, "bev requires 0 < w_min < w_max");
  require(meters_per_pixel > 0.0, "bev.meters_per_pixel must be positive");
  require(columns() <= 100000 && rows() <= 100000, "bev raster is unreasonably large");
}

int BevSpec::columns() const {
  return static_cast<int>(std::floor((u_max - u_min) / meters_per_pixel + 1e-9)) + 1;
}

int BevSpec::rows() const {
  return static_cast<int>(std::floor((w_max - w_min) / meters_per_pixel + 1e-9)) + 1;
}

PixelPoint project_point(const WorldPoint& p, const Calibration& calib) {
  const auto& e = calib.extrinsics;
  const auto& k = calib.intrinsics;
  const double cx = e.rot(0, 0) * p.u + e.rot(0, 1) * p.v + e.rot(0, 2) * p.w + e.tau[0];
  const double cy = e.rot(1, 0) * p.u + e.rot(1, 1) * p.v + e.rot(1, 2) * p.w + e.tau[1];
  const double cz = e.rot(2, 0) * p.u + e.rot(2, 1) * p.v + e.rot(2, 2) * p.w + e.tau[2];
  if (!(cz > kMinDepth)) fail(ErrorCode::BehindCamera, "point lies at or behind the camera plane");
  return {(k.phi_x * cx + k.skew * cy) / cz + k.delta_x, k.phi_y * cy / cz + k.delta_y};
}

std::optional<WorldPoint> try_backproject_ground(const PixelPoint& pixel, const Calibration& calib) noexcept {
  const auto& e = calib.extrinsics;
  const auto& k = calib.intrinsics;
  const double xp = pixel.x - k.delta_x;
  const double yp = pixel.y - k.delta_y;
  // With v = 0 the projection equations are linear in (u, w).
  const double a11 = xp * e.rot(2, 0) - k.phi_x * e.rot(0, 0) - k.skew * e.rot(1, 0);
  const double a12 = xp * e.rot(2, 2) - k.phi_x * e.rot(0, 2) - k.skew * e.rot(1, 2);
  const double b1 = k.phi_x * e.tau[0] + k.skew * e.tau[1] - xp * e.tau[2];
  const double a21 = yp * e.rot(2, 0) - k.phi_y * e.rot(1, 0);
  const double a22 = yp * e.rot(2, 2) - k.phi_y * e.rot(1, 2);
  const double b2 = k.phi_y * e.tau[1] - yp * e.tau[2];

  const double det = a11 * a22 - a12 * a21;
  const double scale = std::hypot(a11, a12) * std::hypot(a21, a22);
  if (scale == 0.0 || !(std::abs(det) > 1e-12 * scale)) return std::nullopt;
  const WorldPoint p{(b1 * a22 - a12 * b2) / det, 0.0, (a11 * b2 - a21 * b1) / det};
  const double depth = e.rot(2, 0) * p.u + e.rot(2, 2) * p.w + e.tau[2];
  if (!(depth > kMinDepth) || !(p.w > 0.0)) return std::nullopt;
  return p;
}

WorldPoint backproject_ground(const PixelPoint& pixel, const Calibration& calib) {
  const auto p = try_backproject_ground(pixel, calib);
  if (!p) fail(ErrorCode::Horizon, "viewing ray does not meet the road in front of the camera");
  return *p;
}

namespace {

template <typename Fn>
void for_each_bev_cell(const Calibration& calib, const BevSpec& bev, Fn&& fn) {
  for (int row = 0; row < bev.rows(); ++row) {
    for (int col = 0; col < bev.columns(); ++col) {
      const WorldPoint ground{bev.u_at(col), 0.0, bev.w_at(row)};
      PixelPoint px;
      try {
        px = project_point(ground, calib);
      } catch (const Error&) {
        continue;
      }
      if (px.x < 0.0 || px.y < 0.0 || px.x > calib.image_width - 1 || px.y > calib.image_height - 1) continue;
      fn(col, row, px);
    }
  }
}

void require_camera_above_ground(const Calibration& calib) {
  // Camera centre C = -omega^T tau; its v coordinate is negative above the road.
  const auto& e = calib.extrinsics;
  const double cv = -(e.rot(0, 1) * e.tau[0] + e.rot(1, 1) * e.tau[1] + e.rot(2, 1) * e.tau[2]);
  require(cv < 0.0, "camera must be above the road plane for inverse perspective mapping");
}

}  // namespace

ImageF32 inverse_perspective_map(const ImageF32& img, const Calibration& calib, const BevSpec& bev) {
  bev.validate();
  calib.validate();
  require(img.width() == calib.image_width && img.height() == calib.image_height,
          "image size does not match the calibration");
  require_camera_above_ground(calib);
  ImageF32 out(bev.columns(), bev.rows(), img.channels());
  for_each_bev_cell(calib, bev, [&](int col, int row, const PixelPoint& px) {
    for (int c = 0; c < img.channels(); ++c) out.at(col, row, c) = img.sample(px.x, px.y, c);
  });
  return out;
}

ImageF32 inverse_perspective_mask(const Calibration& calib, const BevSpec& bev) {
  bev.validate();
  require_camera_above_ground(calib);
  ImageF32 mask(bev.columns(), bev.rows(), 1);
  for_each_bev_cell(calib, bev, [&](int col, int row, const PixelPoint&) { mask.at(col, row) = 1.0f; });
  return mask;
}

double distance_to_object(const BoundingBox& bbox, const Calibration& calib, double class_offset) {
  WorldPoint ground;
  try {
    ground = backproject_ground(bbox.foot_point(), calib);
  } catch (const Error& e) {
    fail(ErrorCode::NotOnGround, std::string("object foot point is not on the road: ") + e.what());
  }
  return std::max(0.0, ground.w + class_offset);
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::Parse, "line " + std::to_string(line_number) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(ErrorCode::Parse, "line " + std::to_string(line_number) + ": empty key");
    if (!out.emplace(key, value).second) {
      fail(ErrorCode::Parse, "line " + std::to_string(line_number) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

Calibration parse_calibration(const std::string& text) {
  const auto kv = parse_key_values(text);
  const auto get = [&](const std::string& key, std::size_t count) {
    const auto it = kv.find(key);
    if (it == kv.end()) fail(ErrorCode::Parse, "calibration is missing key '" + key + "'");
    return parse_numbers(key, it->second, count);
  };
  for (const auto& [key, value] : kv) {
    static const char* known[] = {"phi_x", "phi_y", "skew", "delta_x", "delta_y",
                                  "omega", "tau", "image_width", "image_height"};
    if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; })) {
      fail(ErrorCode::Parse, "unknown calibration key '" + key + "'");
    }
  }
  Calibration calib;
  calib.intrinsics.phi_x = get("phi_x", 1)[0];
  calib.intrinsics.phi_y = get("phi_y", 1)[0];
  calib.intrinsics.skew = kv.count("skew") ? get("skew", 1)[0] : 0.0;
  calib.intrinsics.delta_x = get("delta_x", 1)[0];
  calib.intrinsics.delta_y = get("delta_y", 1)[0];
  const auto omega = get("omega", 9);
  std::copy(omega.begin(), omega.end(), calib.extrinsics.omega.begin());
  const auto tau = get("tau", 3);
  std::copy(tau.begin(), tau.end(), calib.extrinsics.tau.begin());
  const double w = get("image_width", 1)[0];
  const double h = get("image_height", 1)[0];
  if (w != std::floor(w) || h != std::floor(h)) fail(ErrorCode::Parse, "image size must be an integer");
  calib.image_width = static_cast<int>(w);
  calib.image_height = static_cast<int>(h);
  calib.validate();
  return calib;
}

Calibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open calibration '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_calibration(buffer.str());
}

}  // namespace rashdrive
