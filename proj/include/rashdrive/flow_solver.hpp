#pragma once

#include <vector>

#include "rashdrive/flow.hpp"

namespace rashdrive::detail {

// The robust energy linearized around the current flow (u0, v0) for the
// increment (du, dv):
//   sum rho(It + Ix du + Iy dv) + lambda * sum rho(differences of u0+du, v0+dv)
// Each sweep majorizes the penalties with their quadratic upper bounds at the
// current increment (iterated reweighting) and runs one SOR pass on the
// resulting normal equations, so the linearized energy never increases.
class LinearizedFlowSystem {
 public:
  LinearizedFlowSystem(const ImageF32& first, const ImageF32& second, const FlowField& base,
                       double lambda, double epsilon);

  double energy(const std::vector<double>& du, const std::vector<double>& dv) const;
  void sweep(std::vector<double>& du, std::vector<double>& dv, double relaxation = 1.9) const;

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

 private:
  int width_;
  int height_;
  double lambda_;
  double epsilon_;
  std::vector<double> ix_, iy_, it_;
  std::vector<double> u0_, v0_;
  // Per-sweep majorizer weights, kept to avoid reallocating every sweep.
  mutable std::vector<double> data_w_, hu_, hv_, vu_, vv_;
};

FlowField upscale_flow(const FlowField& coarse, int width, int height, double downscale_factor);
void median_filter_flow(FlowField& flow, int radius);

}  // namespace rashdrive::detail
