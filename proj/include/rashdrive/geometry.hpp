#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "rashdrive/image.hpp"

namespace rashdrive {

// Pinhole intrinsics. `skew` is the off-diagonal entry of the intrinsic matrix.
struct Intrinsics {
  double phi_x = 1.0;
  double phi_y = 1.0;
  double skew = 0.0;
  double delta_x = 0.0;
  double delta_y = 0.0;
};

struct Extrinsics {
  std::array<double, 9> omega{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major rotation
  std::array<double, 3> tau{0, 0, 0};                      // meters

  double rot(int row, int col) const noexcept { return omega[static_cast<std::size_t>(row * 3 + col)]; }
};

// World frame: origin on the road directly below the optical centre, u to the
// right, v downward, w forward. The road is the plane v = 0.
struct WorldPoint {
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
};

struct PixelPoint {
  double x = 0.0;
  double y = 0.0;
};

struct Calibration {
  Intrinsics intrinsics;
  Extrinsics extrinsics;
  int image_width = 0;
  int image_height = 0;

  // Throws InvalidInput when the focal lengths, rotation or image size are invalid.
  void validate() const;

  // Camera at `height` meters above the road, pitched down by `pitch` radians,
  // looking along +w.
  static Calibration from_pose(const Intrinsics& intrinsics, double height, double pitch,
                               int image_width, int image_height);
};

struct BevSpec {
  double u_min = -6.0;
  double u_max = 6.0;
  double w_min = 5.0;
  double w_max = 40.0;
  double meters_per_pixel = 0.1;

  void validate() const;
  int columns() const;
  int rows() const;
  double u_at(int column) const noexcept { return u_min + column * meters_per_pixel; }
  double w_at(int row) const noexcept { return w_max - row * meters_per_pixel; }
  double column_of(double u) const noexcept { return (u - u_min) / meters_per_pixel; }
  double row_of(double w) const noexcept { return (w_max - w) / meters_per_pixel; }
};

PixelPoint project_point(const WorldPoint& p, const Calibration& calib);

// Intersects the viewing ray of `pixel` with the road plane v = 0.
WorldPoint backproject_ground(const PixelPoint& pixel, const Calibration& calib);

// Same intersection, empty when the ray misses the road in front of the camera.
std::optional<WorldPoint> try_backproject_ground(const PixelPoint& pixel, const Calibration& calib) noexcept;

ImageF32 inverse_perspective_map(const ImageF32& img, const Calibration& calib, const BevSpec& bev);

// Source-pixel coverage of each BEV cell: 1 where the ground point projects
// inside the image, 0 elsewhere.
ImageF32 inverse_perspective_mask(const Calibration& calib, const BevSpec& bev);

struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;

  PixelPoint foot_point() const noexcept { return {x + 0.5 * width, y + height}; }
};

// Forward distance to the object whose box bottom touches the road, plus a
// per-class correction; clamped to be non-negative.
double distance_to_object(const BoundingBox& bbox, const Calibration& calib, double class_offset);

Calibration parse_calibration(const std::string& text);
Calibration load_calibration(const std::filesystem::path& path);

// `key = value` lines, '#' comments. Shared by the calibration and config files.
std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace rashdrive
