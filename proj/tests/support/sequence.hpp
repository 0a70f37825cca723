// Scripted driving sequences written to disk the way the analyzer expects
// them: numbered frames, a calibration file, a config file and detections.
#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>

#include "rashdrive/netpbm.hpp"
#include "support/scenes.hpp"

namespace rdtest {

// 320x240 dash camera 1.2 m above the road, pitched down 15 degrees.
inline Calibration dash_camera() { return camera(320, 240, 300.0, 1.2, 15.0 * M_PI / 180.0); }

inline std::string calibration_text(const Calibration& c) {
  std::ostringstream out;
  out.precision(17);
  const auto& k = c.intrinsics;
  out << "phi_x = " << k.phi_x << "\nphi_y = " << k.phi_y << "\nskew = " << k.skew << "\ndelta_x = " << k.delta_x
      << "\ndelta_y = " << k.delta_y << "\nomega =";
  for (double v : c.extrinsics.omega) out << ' ' << v;
  out << "\ntau =";
  for (double v : c.extrinsics.tau) out << ' ' << v;
  out << "\nimage_width = " << c.image_width << "\nimage_height = " << c.image_height << '\n';
  return out.str();
}

inline const char* kSequenceConfig =
    "# scripted sequence at 10 frames per second\n"
    "fps = 10\n"
    "seed = 2024\n"
    "bev.u_min = -5\n"
    "bev.u_max = 5\n"
    "bev.w_min = 4\n"
    "bev.w_max = 25\n"
    "bev.meters_per_pixel = 0.1\n"
    "lanes.departure_evaluation_w = 8\n";

struct SequencePaths {
  std::filesystem::path root, frames, calibration, config, detections;
};

using CarScript = std::function<std::optional<Car>(int frame)>;

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Renders `frames` frames of the straight two-lane road with the scripted
// car and writes its (image-clipped) box as an external detection.
inline SequencePaths write_sequence(const std::filesystem::path& root, int frames, const CarScript& script) {
  SequencePaths p{root, root / "frames", root / "calib.txt", root / "config.txt", root / "detections.jsonl"};
  std::filesystem::remove_all(root);
  std::filesystem::create_directories(p.frames);
  const Calibration calib = dash_camera();
  write_text(p.calibration, calibration_text(calib));
  write_text(p.config, kSequenceConfig);

  std::ofstream det(p.detections, std::ios::binary);
  for (int f = 0; f < frames; ++f) {
    RoadScene scene = straight_lanes();
    scene.supersample = 2;
    const auto car = script(f);
    if (car) scene.cars.push_back(*car);
    char name[32];
    std::snprintf(name, sizeof(name), "%06d.ppm", f);
    rashdrive::write_pnm(p.frames / name, render_road(calib, scene));
    if (car) {
      const BoundingBox b = car_box(*car, calib);
      const double x0 = std::max(0.0, b.x), y0 = std::max(0.0, b.y);
      const double x1 = std::min<double>(calib.image_width, b.x + b.width);
      const double y1 = std::min<double>(calib.image_height, b.y + b.height);
      char line[256];
      std::snprintf(line, sizeof(line),
                    "{\"frame\":%d,\"class\":\"car\",\"x\":%.3f,\"y\":%.3f,\"width\":%.3f,\"height\":%.3f,\"score\":0.9}\n",
                    f, x0, y0, x1 - x0, y1 - y0);
      det << line;
    }
  }
  return p;
}

// A car holding its lane 15 m ahead with a gentle in-lane sway.
inline std::optional<Car> calm_car(int frame) {
  Car c;
  c.u = 0.15 * std::sin(frame * 0.1);
  c.w = 15.0;
  return c;
}

// A car that weaves out across the right boundary and back within three
// seconds, then closes in to 2 m.
inline std::optional<Car> rash_car(int frame) {
  Car c;
  c.w = 10.0;
  if (frame >= 10 && frame <= 40) c.u = 2.2 * std::sin(M_PI * (frame - 10) / 30.0);
  if (frame > 40) c.w = std::max(2.0, 10.0 - 0.45 * (frame - 40));
  return c;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace rdtest
