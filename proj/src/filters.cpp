#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rashdrive/error.hpp"
#include "rashdrive/image.hpp"

namespace rashdrive {

ImageF32 convolve2d(const ImageF32& img, const Kernel2D& kernel) {
  require(img.channels() == 1, "convolve2d expects a single-channel image");
  require(kernel.width % 2 == 1 && kernel.height % 2 == 1, "kernel dimensions must be odd");
  require(kernel.weights.size() ==
              static_cast<std::size_t>(kernel.width) * static_cast<std::size_t>(kernel.height),
          "kernel weight count does not match its dimensions");
  const int rx = kernel.width / 2;
  const int ry = kernel.height / 2;
  ImageF32 out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      for (int j = 0; j < kernel.height; ++j) {
        for (int i = 0; i < kernel.width; ++i) {
          acc += kernel.weights[static_cast<std::size_t>(j * kernel.width + i)] *
                 img.clamped(x + i - rx, y + j - ry);
        }
      }
      out.at(x, y) = static_cast<float>(acc);
    }
  }
  return out;
}

ImageF32 convolve_separable(const ImageF32& img, std::span<const double> row,
                            std::span<const double> col) {
  require(img.channels() == 1, "convolve_separable expects a single-channel image");
  require(row.size() % 2 == 1 && col.size() % 2 == 1, "kernel dimensions must be odd");
  const int w = img.width();
  const int h = img.height();
  const int rx = static_cast<int>(row.size() / 2);
  const int ry = static_cast<int>(col.size() / 2);

  // Horizontal pass kept in double to avoid accumulating float rounding twice.
  std::vector<double> tmp(img.pixel_count());
  std::vector<double> line(static_cast<std::size_t>(w + 2 * rx));
  for (int y = 0; y < h; ++y) {
    for (int x = -rx; x < w + rx; ++x) line[static_cast<std::size_t>(x + rx)] = img.clamped(x, y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < row.size(); ++i) acc += row[i] * line[static_cast<std::size_t>(x) + i];
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  ImageF32 out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::size_t j = 0; j < col.size(); ++j) {
        const int yy = std::clamp(y + static_cast<int>(j) - ry, 0, h - 1);
        acc += col[j] * tmp[static_cast<std::size_t>(yy) * w + x];
      }
      out.at(x, y) = static_cast<float>(acc);
    }
  }
  return out;
}

namespace {

// Sampled 1D Gaussian derivative of the given order, scale-normalized by
// sigma^order. Even orders are made zero-sum so constants are annihilated.
std::vector<double> gaussian_derivative_kernel(int order, double sigma, int radius) {
  std::vector<double> g(static_cast<std::size_t>(2 * radius + 1));
  double norm = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    g[static_cast<std::size_t>(i + radius)] = v;
    norm += v;
  }
  for (double& v : g) v /= norm;
  if (order == 0) return g;

  const double s2 = sigma * sigma;
  std::vector<double> k(g.size());
  for (int i = -radius; i <= radius; ++i) {
    const double x = i;
    double hermite = 0.0;
    switch (order) {
      case 1: hermite = -x / s2; break;
      case 2: hermite = (x * x - s2) / (s2 * s2); break;
      case 3: hermite = (3.0 * x * s2 - x * x * x) / (s2 * s2 * s2); break;
      case 4: hermite = (x * x * x * x - 6.0 * x * x * s2 + 3.0 * s2 * s2) / (s2 * s2 * s2 * s2); break;
      default: fail(ErrorCode::InvalidInput, "unsupported derivative order");
    }
    k[static_cast<std::size_t>(i + radius)] =
        hermite * g[static_cast<std::size_t>(i + radius)] * std::pow(sigma, order);
  }
  if (order % 2 == 0) {
    const double mean = std::accumulate(k.begin(), k.end(), 0.0) / static_cast<double>(k.size());
    for (double& v : k) v -= mean;
  } else {
    for (int i = 1; i <= radius; ++i) {
      const double a = 0.5 * (k[static_cast<std::size_t>(radius + i)] - k[static_cast<std::size_t>(radius - i)]);
      k[static_cast<std::size_t>(radius + i)] = a;
      k[static_cast<std::size_t>(radius - i)] = -a;
    }
    k[static_cast<std::size_t>(radius)] = 0.0;
  }
  return k;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

ImageF32 gaussian_blur(const ImageF32& img, double sigma) {
  require(sigma > 0.0, "blur sigma must be positive");
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  const auto g = gaussian_derivative_kernel(0, sigma, radius);
  if (img.channels() == 1) return convolve_separable(img, g, g);
  ImageF32 out(img.width(), img.height(), img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    const ImageF32 blurred = convolve_separable(img.channel(c), g, g);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) out.at(x, y, c) = blurred.at(x, y);
  }
  return out;
}

SteerableBasis::SteerableBasis(const ImageF32& img, int order, double sigma)
    : order_(order), radius_(static_cast<int>(std::ceil(5.0 * sigma))) {
  require(order == 2 || order == 4, "steerable filters support orders 2 and 4");
  require(sigma > 0.0, "steerable filter sigma must be positive");
  require(img.channels() == 1, "steerable filters expect a single-channel image");
  std::vector<std::vector<double>> kernels;
  for (int d = 0; d <= order; ++d) kernels.push_back(gaussian_derivative_kernel(d, sigma, radius_));
  // Basis k: derivative of order (order-k) along x and k along y.
  for (int k = 0; k <= order; ++k) {
    responses_.push_back(convolve_separable(img, kernels[static_cast<std::size_t>(order - k)],
                                            kernels[static_cast<std::size_t>(k)]));
  }
}

ImageF32 SteerableBasis::steer(double orientation) const {
  const double c = std::cos(orientation);
  const double s = std::sin(orientation);
  std::vector<double> coeff(static_cast<std::size_t>(order_ + 1));
  for (int k = 0; k <= order_; ++k) {
    coeff[static_cast<std::size_t>(k)] =
        binomial(order_, k) * std::pow(c, order_ - k) * std::pow(s, k);
  }
  const ImageF32& first = responses_.front();
  ImageF32 out(first.width(), first.height(), 1);
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    double acc = 0.0;
    for (int k = 0; k <= order_; ++k) {
      acc += coeff[static_cast<std::size_t>(k)] * responses_[static_cast<std::size_t>(k)].data()[i];
    }
    dst[i] = static_cast<float>(acc);
  }
  return out;
}

ImageF32 steerable_filter_response(const ImageF32& img, int order, double orientation,
                                   double sigma) {
  return SteerableBasis(img, order, sigma).steer(orientation);
}

}  // namespace rashdrive
