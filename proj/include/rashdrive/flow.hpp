#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rashdrive/image.hpp"

namespace rashdrive {

struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> u;  // horizontal velocity, px/frame
  std::vector<float> v;  // vertical velocity, px/frame

  FlowField() = default;
  FlowField(int w, int h, float u0 = 0.0f, float v0 = 0.0f);

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }
  bool all_finite() const noexcept;
};

struct FlowParams {
  double lambda = 0.05;
  double penalty_epsilon = 1e-3;
  int pyramid_levels = 4;
  double downscale_factor = 0.5;
  int warps_per_level = 3;
  int solver_iterations_per_warp = 30;
  int median_filter_radius = 2;

  void validate() const;
};

struct FlowStats {
  double mean_u = 0.0;
  double mean_v = 0.0;
  double std_u = 0.0;
  double std_v = 0.0;
  std::size_t pixel_count = 0;
};

struct PixelRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

// Shifted Charbonnier penalty sqrt(z^2 + eps^2) - eps, so rho(0) == 0.
inline double charbonnier(double z, double eps) noexcept {
  return std::sqrt(z * z + eps * eps) - eps;
}

// Robust energy: sum of rho(I1(x,y) - I2(x+u, y+v)) plus lambda times the
// penalized forward differences of u and v along x and y.
double flow_energy(const ImageF32& first, const ImageF32& second, const FlowField& flow,
                   const FlowParams& params);

// Observer invoked after every warp with the pyramid level, the warp index and
// the energy of the current flow on that level's images.
using FlowProgress = std::function<void(int level, int warp, double energy)>;

FlowField estimate_flow(const ImageF32& first, const ImageF32& second, const FlowParams& params,
                        const FlowProgress& progress = {});

FlowStats region_flow_stats(const FlowField& flow, const PixelRect& region);

// Flow dump: "RFLO", u16 width, u16 height, u32 reserved, then u and v planes
// of little-endian float32.
std::string encode_flow(const FlowField& flow);
FlowField decode_flow(const std::string& bytes);
void write_flow(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flow(const std::filesystem::path& path);

}  // namespace rashdrive
