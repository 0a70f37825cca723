#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rashdrive {

// Row-major, interleaved float image. Intensity channels live in [0,1];
// Lab images keep their native ranges.
class ImageF32 {
 public:
  ImageF32() = default;
  ImageF32(int width, int height, int channels = 1, float fill = 0.0f);
  ImageF32(int width, int height, int channels, std::vector<float> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const noexcept { return data_.empty(); }

  float& at(int x, int y, int c = 0) noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int x, int y, int c = 0) const noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  // Edge-replicating access.
  float clamped(int x, int y, int c = 0) const noexcept;
  // Bilinear sample at a sub-pixel position, replicate border.
  float sample(double x, double y, int c = 0) const noexcept;

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  ImageF32 channel(int c) const;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

struct Pyramid {
  std::vector<ImageF32> levels;  // level 0 is the finest
  double downscale_factor = 0.5;
};

// Odd-sized 2D weights, row-major.
struct Kernel2D {
  int width = 1;
  int height = 1;
  std::vector<double> weights{1.0};
};

ImageF32 to_grayscale(const ImageF32& img);

// sRGB (D65) -> CIELAB. Output channels are L* in [0,100], a*, b*.
ImageF32 rgb_to_lab(const ImageF32& img);

// Correlation with replicate border: out(x,y) = sum k(i,j) I(x+i-rx, y+j-ry).
ImageF32 convolve2d(const ImageF32& img, const Kernel2D& kernel);

// Separable correlation: horizontal pass with `row`, vertical pass with `col`.
ImageF32 convolve_separable(const ImageF32& img, std::span<const double> row,
                            std::span<const double> col);

ImageF32 gaussian_blur(const ImageF32& img, double sigma);

enum class SteerableOrder { Second = 2, Fourth = 4 };

// Steerable Gaussian-derivative response of the given order, steered to
// `orientation` (radians, measured from the +x axis). A bright line running
// perpendicular to the orientation gives an extremal response.
ImageF32 steerable_filter_response(const ImageF32& img, int order, double orientation,
                                   double sigma = 2.0);

// Basis responses of one order, reusable for many steering angles.
class SteerableBasis {
 public:
  SteerableBasis(const ImageF32& img, int order, double sigma);

  ImageF32 steer(double orientation) const;
  int order() const noexcept { return order_; }
  int radius() const noexcept { return radius_; }

 private:
  int order_;
  int radius_;
  std::vector<ImageF32> responses_;  // d^order / dx^(order-k) dy^k, k = 0..order
};

// Bilinear resize; sample positions follow the supplied scale (dst = src * scale).
ImageF32 resample(const ImageF32& img, int width, int height, double scale_x, double scale_y);

Pyramid build_pyramid(const ImageF32& img, int levels, double downscale_factor);

// Level dimension rule shared by everything that builds pyramids.
int pyramid_level_size(int size, double downscale_factor, int level);

// Largest level count (≤ requested) whose coarsest level is at least 16x16.
int max_pyramid_levels(int width, int height, double downscale_factor, int requested);

}  // namespace rashdrive
