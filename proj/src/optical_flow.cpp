#include <algorithm>
#include <cmath>

#include "rashdrive/error.hpp"
#include "rashdrive/flow.hpp"
#include "rashdrive/flow_solver.hpp"

namespace rashdrive {

FlowField::FlowField(int w, int h, float u0, float v0) : width(w), height(h) {
  require(w >= 1 && h >= 1, "flow field dimensions must be positive");
  u.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), u0);
  v.assign(u.size(), v0);
}

bool FlowField::all_finite() const noexcept {
  const auto finite = [](float x) { return std::isfinite(x); };
  return std::all_of(u.begin(), u.end(), finite) && std::all_of(v.begin(), v.end(), finite);
}

void FlowParams::validate() const {
  require(lambda > 0.0, "flow.lambda must be positive");
  require(penalty_epsilon > 0.0, "flow.penalty_epsilon must be positive");
  require(pyramid_levels >= 1, "flow.pyramid_levels must be at least 1");
  require(downscale_factor > 0.0 && downscale_factor < 1.0,
          "flow.downscale_factor must lie in (0,1)");
  require(warps_per_level >= 1, "flow.warps_per_level must be at least 1");
  require(solver_iterations_per_warp >= 1, "flow.solver_iterations_per_warp must be at least 1");
  require(median_filter_radius >= 0, "flow.median_filter_radius must be non-negative");
}

double flow_energy(const ImageF32& first, const ImageF32& second, const FlowField& flow,
                   const FlowParams& params) {
  require(first.channels() == 1 && second.channels() == 1, "flow_energy expects gray images");
  require(first.width() == second.width() && first.height() == second.height() &&
              flow.width == first.width() && flow.height == first.height(),
          "flow_energy inputs must share dimensions");
  const double eps = params.penalty_epsilon;
  const int w = flow.width;
  const int h = flow.height;
  double data = 0.0;
  double smooth = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = flow.index(x, y);
      const double warped = second.sample(x + flow.u[i], y + flow.v[i]);
      data += charbonnier(first.at(x, y) - warped, eps);
      if (x + 1 < w) {
        smooth += charbonnier(flow.u[i] - flow.u[i + 1], eps);
        smooth += charbonnier(flow.v[i] - flow.v[i + 1], eps);
      }
      if (y + 1 < h) {
        const std::size_t j = i + static_cast<std::size_t>(w);
        smooth += charbonnier(flow.u[i] - flow.u[j], eps);
        smooth += charbonnier(flow.v[i] - flow.v[j], eps);
      }
    }
  }
  return data + params.lambda * smooth;
}

namespace detail {

namespace {

// Five-point central difference, replicate border.
double derivative_x(const ImageF32& img, int x, int y) {
  return (img.clamped(x - 2, y) - 8.0 * img.clamped(x - 1, y) + 8.0 * img.clamped(x + 1, y) -
          img.clamped(x + 2, y)) / 12.0;
}

double derivative_y(const ImageF32& img, int x, int y) {
  return (img.clamped(x, y - 2) - 8.0 * img.clamped(x, y - 1) + 8.0 * img.clamped(x, y + 1) -
          img.clamped(x, y + 2)) / 12.0;
}

double weight(double z, double eps) { return 1.0 / std::sqrt(z * z + eps * eps); }

}  // namespace

LinearizedFlowSystem::LinearizedFlowSystem(const ImageF32& first, const ImageF32& second,
                                           const FlowField& base, double lambda, double epsilon)
    : width_(base.width), height_(base.height), lambda_(lambda), epsilon_(epsilon) {
  const std::size_t n = base.u.size();
  ix_.resize(n);
  iy_.resize(n);
  it_.resize(n);
  u0_.assign(base.u.begin(), base.u.end());
  v0_.assign(base.v.begin(), base.v.end());

  // Derivatives of the second frame are taken before warping and sampled at
  // the warped positions, then averaged with those of the first frame.
  ImageF32 gx(width_, height_, 1);
  ImageF32 gy(width_, height_, 1);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      gx.at(x, y) = static_cast<float>(derivative_x(second, x, y));
      gy.at(x, y) = static_cast<float>(derivative_y(second, x, y));
    }
  }
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const std::size_t i = base.index(x, y);
      const double wx = x + u0_[i];
      const double wy = y + v0_[i];
      ix_[i] = 0.5 * (gx.sample(wx, wy) + derivative_x(first, x, y));
      iy_[i] = 0.5 * (gy.sample(wx, wy) + derivative_y(first, x, y));
      it_[i] = second.sample(wx, wy) - first.at(x, y);
    }
  }
}

double LinearizedFlowSystem::energy(const std::vector<double>& du,
                                    const std::vector<double>& dv) const {
  double data = 0.0;
  double smooth = 0.0;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width_ + x;
      data += charbonnier(it_[i] + ix_[i] * du[i] + iy_[i] * dv[i], epsilon_);
      const double ui = u0_[i] + du[i];
      const double vi = v0_[i] + dv[i];
      if (x + 1 < width_) {
        smooth += charbonnier(ui - u0_[i + 1] - du[i + 1], epsilon_);
        smooth += charbonnier(vi - v0_[i + 1] - dv[i + 1], epsilon_);
      }
      if (y + 1 < height_) {
        const std::size_t j = i + static_cast<std::size_t>(width_);
        smooth += charbonnier(ui - u0_[j] - du[j], epsilon_);
        smooth += charbonnier(vi - v0_[j] - dv[j], epsilon_);
      }
    }
  }
  return data + lambda_ * smooth;
}

void LinearizedFlowSystem::sweep(std::vector<double>& du, std::vector<double>& dv,
                                 double relaxation) const {
  const std::size_t n = du.size();
  const auto w = static_cast<std::size_t>(width_);
  // Quadratic majorizer weights at the current increment. Border entries of
  // the edge weights are never read, so they need no reset between sweeps.
  if (data_w_.size() != n) {
    data_w_.assign(n, 0.0);
    hu_.assign(n, 0.0);
    hv_.assign(n, 0.0);
    vu_.assign(n, 0.0);
    vv_.assign(n, 0.0);
  }
  std::vector<double>& data_w = data_w_;
  std::vector<double>& hu = hu_;
  std::vector<double>& hv = hv_;
  std::vector<double>& vu = vu_;
  std::vector<double>& vv = vv_;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      data_w[i] = weight(it_[i] + ix_[i] * du[i] + iy_[i] * dv[i], epsilon_);
      const double ui = u0_[i] + du[i];
      const double vi = v0_[i] + dv[i];
      if (x + 1 < width_) {
        hu[i] = lambda_ * weight(ui - u0_[i + 1] - du[i + 1], epsilon_);
        hv[i] = lambda_ * weight(vi - v0_[i + 1] - dv[i + 1], epsilon_);
      }
      if (y + 1 < height_) {
        vu[i] = lambda_ * weight(ui - u0_[i + w] - du[i + w], epsilon_);
        vv[i] = lambda_ * weight(vi - v0_[i + w] - dv[i + w], epsilon_);
      }
    }
  }

  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      // Neighbour sums: sum_q w_pq * (u0_q + du_q - u0_p).
      double su = 0.0, sv = 0.0, wu = 0.0, wv = 0.0;
      const auto accumulate = [&](std::size_t q, double weight_u, double weight_v) {
        su += weight_u * (u0_[q] + du[q] - u0_[i]);
        sv += weight_v * (v0_[q] + dv[q] - v0_[i]);
        wu += weight_u;
        wv += weight_v;
      };
      if (x + 1 < width_) accumulate(i + 1, hu[i], hv[i]);
      if (x > 0) accumulate(i - 1, hu[i - 1], hv[i - 1]);
      if (y + 1 < height_) accumulate(i + w, vu[i], vv[i]);
      if (y > 0) accumulate(i - w, vu[i - w], vv[i - w]);

      const double a = data_w[i];
      const double ix = ix_[i];
      const double iy = iy_[i];
      const double target_u = (su - a * ix * (it_[i] + iy * dv[i])) / (a * ix * ix + wu);
      du[i] += relaxation * (target_u - du[i]);
      const double target_v = (sv - a * iy * (it_[i] + ix * du[i])) / (a * iy * iy + wv);
      dv[i] += relaxation * (target_v - dv[i]);
    }
  }
}

FlowField upscale_flow(const FlowField& coarse, int width, int height, double downscale_factor) {
  ImageF32 cu(coarse.width, coarse.height, 1, std::vector<float>(coarse.u));
  ImageF32 cv(coarse.width, coarse.height, 1, std::vector<float>(coarse.v));
  const double scale = 1.0 / downscale_factor;
  const ImageF32 fu = resample(cu, width, height, scale, scale);
  const ImageF32 fv = resample(cv, width, height, scale, scale);
  FlowField fine(width, height);
  for (std::size_t i = 0; i < fine.u.size(); ++i) {
    fine.u[i] = static_cast<float>(fu.data()[i] * scale);
    fine.v[i] = static_cast<float>(fv.data()[i] * scale);
  }
  return fine;
}

void median_filter_flow(FlowField& flow, int radius) {
  if (radius <= 0) return;
  const auto filter = [&](std::vector<float>& plane) {
    std::vector<float> out(plane.size());
    std::vector<float> window;
    window.reserve(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)));
    for (int y = 0; y < flow.height; ++y) {
      for (int x = 0; x < flow.width; ++x) {
        window.clear();
        const bool interior = x >= radius && y >= radius && x + radius < flow.width && y + radius < flow.height;
        for (int dy = -radius; dy <= radius; ++dy) {
          const int yy = std::clamp(y + dy, 0, flow.height - 1);
          if (interior) {
            const float* row = &plane[flow.index(x - radius, yy)];
            window.insert(window.end(), row, row + 2 * radius + 1);
            continue;
          }
          for (int dx = -radius; dx <= radius; ++dx) {
            const int xx = std::clamp(x + dx, 0, flow.width - 1);
            window.push_back(plane[flow.index(xx, yy)]);
          }
        }
        const auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
        std::nth_element(window.begin(), mid, window.end());
        out[flow.index(x, y)] = *mid;
      }
    }
    plane.swap(out);
  };
  filter(flow.u);
  filter(flow.v);
}

}  // namespace detail

FlowField estimate_flow(const ImageF32& first, const ImageF32& second, const FlowParams& params,
                        const FlowProgress& progress) {
  params.validate();
  require(first.channels() == 1 && second.channels() == 1, "estimate_flow expects gray images");
  require(first.width() == second.width() && first.height() == second.height(),
          "estimate_flow frames must share dimensions");
  require(first.width() >= 32 && first.height() >= 32, "estimate_flow needs at least 32x32 frames");

  const int levels = max_pyramid_levels(first.width(), first.height(), params.downscale_factor,
                                        params.pyramid_levels);
  const Pyramid p1 = build_pyramid(first, levels, params.downscale_factor);
  const Pyramid p2 = build_pyramid(second, levels, params.downscale_factor);

  FlowField flow;
  for (int level = levels - 1; level >= 0; --level) {
    const ImageF32& i1 = p1.levels[static_cast<std::size_t>(level)];
    const ImageF32& i2 = p2.levels[static_cast<std::size_t>(level)];
    if (flow.u.empty()) {
      flow = FlowField(i1.width(), i1.height());
    } else {
      flow = detail::upscale_flow(flow, i1.width(), i1.height(), params.downscale_factor);
    }
    for (int warp = 0; warp < params.warps_per_level; ++warp) {
      const detail::LinearizedFlowSystem system(i1, i2, flow, params.lambda,
                                                params.penalty_epsilon);
      std::vector<double> du(flow.u.size(), 0.0);
      std::vector<double> dv(flow.u.size(), 0.0);
      for (int it = 0; it < params.solver_iterations_per_warp; ++it) system.sweep(du, dv);
      for (std::size_t i = 0; i < du.size(); ++i) {
        flow.u[i] += static_cast<float>(du[i]);
        flow.v[i] += static_cast<float>(dv[i]);
      }
      detail::median_filter_flow(flow, params.median_filter_radius);
      if (progress) progress(level, warp, flow_energy(i1, i2, flow, params));
    }
  }
  return flow;
}

FlowStats region_flow_stats(const FlowField& flow, const PixelRect& region) {
  const int x0 = std::max(region.x, 0);
  const int y0 = std::max(region.y, 0);
  const int x1 = std::min(region.x + region.width, flow.width);
  const int y1 = std::min(region.y + region.height, flow.height);
  if (x0 >= x1 || y0 >= y1) fail(ErrorCode::EmptyRegion, "region does not intersect the flow field");

  FlowStats stats;
  double su = 0.0, sv = 0.0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      su += flow.u[flow.index(x, y)];
      sv += flow.v[flow.index(x, y)];
    }
  }
  stats.pixel_count = static_cast<std::size_t>(x1 - x0) * static_cast<std::size_t>(y1 - y0);
  const double n = static_cast<double>(stats.pixel_count);
  stats.mean_u = su / n;
  stats.mean_v = sv / n;
  double qu = 0.0, qv = 0.0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const double du = flow.u[flow.index(x, y)] - stats.mean_u;
      const double dv = flow.v[flow.index(x, y)] - stats.mean_v;
      qu += du * du;
      qv += dv * dv;
    }
  }
  stats.std_u = std::sqrt(qu / n);
  stats.std_v = std::sqrt(qv / n);
  return stats;
}

}  // namespace rashdrive
