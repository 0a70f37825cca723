// Random but plausible road-facing cameras.
#pragma once

#include <cmath>
#include <random>

#include "rashdrive/geometry.hpp"
#include "support/oracles.hpp"

namespace rdtest {

// Camera `height` meters above the road origin, rotated by yaw (about the
// vertical), then pitch (down), then roll (about the optical axis).
inline rashdrive::Calibration posed_camera(const rashdrive::Intrinsics& k, double height, double pitch,
                                           double yaw, double roll, int width, int image_height) {
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double P[3][3] = {{1, 0, 0}, {0, cp, -sp}, {0, sp, cp}};
  const double Y[3][3] = {{cy, 0, -sy}, {0, 1, 0}, {sy, 0, cy}};
  const double Rz[3][3] = {{cr, -sr, 0}, {sr, cr, 0}, {0, 0, 1}};
  double PY[3][3] = {}, R[3][3] = {};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int m = 0; m < 3; ++m) PY[i][j] += P[i][m] * Y[m][j];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int m = 0; m < 3; ++m) R[i][j] += Rz[i][m] * PY[m][j];

  rashdrive::Calibration calib;
  calib.intrinsics = k;
  calib.image_width = width;
  calib.image_height = image_height;
  // Optical centre at (0, -height, 0): tau = -R * centre.
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) calib.extrinsics.omega[static_cast<std::size_t>(i * 3 + j)] = R[i][j];
    calib.extrinsics.tau[static_cast<std::size_t>(i)] = R[i][1] * height;
  }
  return calib;
}

inline rashdrive::Calibration random_camera(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  rashdrive::Intrinsics k;
  k.phi_x = 300.0 + 700.0 * unit(rng);
  k.phi_y = k.phi_x * (0.95 + 0.1 * unit(rng));
  k.skew = (unit(rng) - 0.5) * 2.0;
  k.delta_x = 300.0 + 40.0 * unit(rng);
  k.delta_y = 220.0 + 40.0 * unit(rng);
  return posed_camera(k, 1.0 + 1.5 * unit(rng), 0.02 + 0.25 * unit(rng), (unit(rng) - 0.5) * 0.2,
                      (unit(rng) - 0.5) * 0.1, 640, 480);
}

inline PinholeRef reference_of(const rashdrive::Calibration& c) {
  PinholeRef ref{};
  const auto& k = c.intrinsics;
  ref.K[0][0] = k.phi_x;
  ref.K[0][1] = k.skew;
  ref.K[0][2] = k.delta_x;
  ref.K[1][1] = k.phi_y;
  ref.K[1][2] = k.delta_y;
  ref.K[2][2] = 1.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) ref.R[i][j] = c.extrinsics.rot(i, j);
    ref.t[i] = c.extrinsics.tau[static_cast<std::size_t>(i)];
  }
  return ref;
}

}  // namespace rdtest
