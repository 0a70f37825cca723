#include "rashdrive/image.hpp"

#include <algorithm>
#include <cmath>

#include "rashdrive/error.hpp"

namespace rashdrive {

ImageF32::ImageF32(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  require(width >= 1 && height >= 1, "image dimensions must be positive");
  require(channels == 1 || channels == 3, "image must have 1 or 3 channels");
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), fill);
}

ImageF32::ImageF32(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  require(width >= 1 && height >= 1, "image dimensions must be positive");
  require(channels == 1 || channels == 3, "image must have 1 or 3 channels");
  require(data_.size() == pixel_count() * static_cast<std::size_t>(channels),
          "image data length does not match width*height*channels");
}

float ImageF32::clamped(int x, int y, int c) const noexcept {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return at(x, y, c);
}

float ImageF32::sample(double x, double y, int c) const noexcept {
  x = std::clamp(x, 0.0, static_cast<double>(width_ - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * at(x0, y0, c) + fx * at(x1, y0, c);
  const double bottom = (1.0 - fx) * at(x0, y1, c) + fx * at(x1, y1, c);
  return static_cast<float>((1.0 - fy) * top + fy * bottom);
}

ImageF32 ImageF32::channel(int c) const {
  require(c >= 0 && c < channels_, "channel index out of range");
  ImageF32 out(width_, height_, 1);
  for (std::size_t i = 0; i < pixel_count(); ++i) out.data_[i] = data_[i * channels_ + c];
  return out;
}

ImageF32 to_grayscale(const ImageF32& img) {
  require(img.channels() == 3, "to_grayscale expects a 3-channel image");
  ImageF32 out(img.width(), img.height(), 1);
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    dst[i] = static_cast<float>(0.299 * src[3 * i] + 0.587 * src[3 * i + 1] +
                                0.114 * src[3 * i + 2]);
  }
  return out;
}

namespace {

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

// sRGB primaries, D65.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

}  // namespace

ImageF32 rgb_to_lab(const ImageF32& img) {
  require(img.channels() == 3, "rgb_to_lab expects a 3-channel image");
  // Reference white is the image of RGB (1,1,1) so neutral inputs land on a*=b*=0.
  double white[3];
  for (int r = 0; r < 3; ++r) white[r] = kRgbToXyz[r][0] + kRgbToXyz[r][1] + kRgbToXyz[r][2];

  ImageF32 out(img.width(), img.height(), 3);
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double lin[3] = {srgb_to_linear(src[3 * i]), srgb_to_linear(src[3 * i + 1]),
                           srgb_to_linear(src[3 * i + 2])};
    double f[3];
    for (int r = 0; r < 3; ++r) {
      const double xyz = kRgbToXyz[r][0] * lin[0] + kRgbToXyz[r][1] * lin[1] +
                         kRgbToXyz[r][2] * lin[2];
      f[r] = lab_f(xyz / white[r]);
    }
    dst[3 * i] = static_cast<float>(116.0 * f[1] - 16.0);
    dst[3 * i + 1] = static_cast<float>(500.0 * (f[0] - f[1]));
    dst[3 * i + 2] = static_cast<float>(200.0 * (f[1] - f[2]));
  }
  return out;
}

int pyramid_level_size(int size, double downscale_factor, int level) {
  for (int l = 0; l < level; ++l) {
    size = static_cast<int>(std::ceil(size * downscale_factor - 1e-9));
  }
  return size;
}

int max_pyramid_levels(int width, int height, double downscale_factor, int requested) {
  int levels = 1;
  while (levels < requested &&
         pyramid_level_size(width, downscale_factor, levels) >= 16 &&
         pyramid_level_size(height, downscale_factor, levels) >= 16) {
    ++levels;
  }
  return levels;
}

ImageF32 resample(const ImageF32& img, int width, int height, double scale_x, double scale_y) {
  ImageF32 out(width, height, img.channels());
  for (int y = 0; y < height; ++y) {
    const double sy = (y + 0.5) / scale_y - 0.5;
    for (int x = 0; x < width; ++x) {
      const double sx = (x + 0.5) / scale_x - 0.5;
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.sample(sx, sy, c);
    }
  }
  return out;
}

Pyramid build_pyramid(const ImageF32& img, int levels, double downscale_factor) {
  require(levels >= 1, "pyramid needs at least one level");
  require(downscale_factor > 0.0 && downscale_factor < 1.0,
          "downscale factor must lie in (0,1)");
  if (levels > 1) {
    const int w = pyramid_level_size(img.width(), downscale_factor, levels - 1);
    const int h = pyramid_level_size(img.height(), downscale_factor, levels - 1);
    require(w >= 16 && h >= 16, "coarsest pyramid level would be smaller than 16x16");
  }
  Pyramid pyr;
  pyr.downscale_factor = downscale_factor;
  pyr.levels.reserve(static_cast<std::size_t>(levels));
  pyr.levels.push_back(img);
  const double sigma = 0.5 * std::sqrt(1.0 / (downscale_factor * downscale_factor) - 1.0);
  for (int l = 1; l < levels; ++l) {
    const ImageF32& prev = pyr.levels.back();
    const int w = static_cast<int>(std::ceil(prev.width() * downscale_factor - 1e-9));
    const int h = static_cast<int>(std::ceil(prev.height() * downscale_factor - 1e-9));
    pyr.levels.push_back(
        resample(gaussian_blur(prev, sigma), w, h, downscale_factor, downscale_factor));
  }
  return pyr;
}

}  // namespace rashdrive
