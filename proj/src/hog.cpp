#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "rashdrive/detection.hpp"
#include "rashdrive/error.hpp"

namespace rashdrive {

void HogParams::validate() const {
  require(cell_size >= 2, "hog.cell_size must be at least 2");
  require(bins >= 2, "hog.bins must be at least 2");
  require(block_size >= 1, "hog.block_size must be at least 1");
  require(block_stride >= 1, "hog.block_stride must be at least 1");
  require(clip > 0.0, "hog.clip must be positive");
}

namespace {

constexpr double kNormEpsilon = 1e-3;

// Per-cell orientation histograms with linear interpolation between the two
// nearest bin centres. Cells cover the top-left cells_x*cells_y region.
std::vector<double> cell_histograms(const ImageF32& img, const HogParams& p, int cells_x, int cells_y) {
  std::vector<double> hist(static_cast<std::size_t>(cells_x) * cells_y * p.bins, 0.0);
  const double bin_width = 180.0 / p.bins;
  for (int y = 0; y < cells_y * p.cell_size; ++y) {
    for (int x = 0; x < cells_x * p.cell_size; ++x) {
      const double gx = img.clamped(x + 1, y) - img.clamped(x - 1, y);
      const double gy = img.clamped(x, y + 1) - img.clamped(x, y - 1);
      const double magnitude = std::hypot(gx, gy);
      if (magnitude == 0.0) continue;
      double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (angle < 0.0) angle += 180.0;
      if (angle >= 180.0) angle -= 180.0;
      const double pos = angle / bin_width - 0.5;
      const int b0 = static_cast<int>(std::floor(pos));
      const double frac = pos - b0;
      const int lo = (b0 % p.bins + p.bins) % p.bins;
      const int hi = (lo + 1) % p.bins;
      const std::size_t base =
          (static_cast<std::size_t>(y / p.cell_size) * cells_x + static_cast<std::size_t>(x / p.cell_size)) * p.bins;
      hist[base + static_cast<std::size_t>(lo)] += (1.0 - frac) * magnitude;
      hist[base + static_cast<std::size_t>(hi)] += frac * magnitude;
    }
  }
  return hist;
}

// L2-Hys: normalize, clip, renormalize.
void l2_hys(std::vector<double>& block, double clip) {
  const auto normalize = [&] {
    double sq = 0.0;
    for (double v : block) sq += v * v;
    const double inv = 1.0 / std::sqrt(sq + kNormEpsilon * kNormEpsilon);
    for (double& v : block) v *= inv;
  };
  normalize();
  for (double& v : block) v = std::min(v, clip);
  normalize();
}

template <typename Fn>
void for_each_block(int cells_x, int cells_y, const HogParams& p, const std::vector<double>& hist, Fn&& fn) {
  std::vector<double> block(static_cast<std::size_t>(p.block_size * p.block_size * p.bins));
  for (int by = 0; by + p.block_size <= cells_y; by += p.block_stride) {
    for (int bx = 0; bx + p.block_size <= cells_x; bx += p.block_stride) {
      std::size_t k = 0;
      for (int cy = by; cy < by + p.block_size; ++cy) {
        for (int cx = bx; cx < bx + p.block_size; ++cx) {
          const std::size_t base = (static_cast<std::size_t>(cy) * cells_x + cx) * p.bins;
          for (int b = 0; b < p.bins; ++b) block[k++] = hist[base + static_cast<std::size_t>(b)];
        }
      }
      l2_hys(block, p.clip);
      fn(bx, by, block);
    }
  }
}

}  // namespace

std::vector<float> hog_features(const ImageF32& window, const HogParams& params) {
  params.validate();
  require(window.channels() == 1, "hog_features expects a gray window");
  require(window.width() % params.cell_size == 0 && window.height() % params.cell_size == 0,
          "window dimensions must be divisible by the cell size");
  const int cells_x = window.width() / params.cell_size;
  const int cells_y = window.height() / params.cell_size;
  require(cells_x >= params.block_size && cells_y >= params.block_size, "window holds no complete block");
  const auto hist = cell_histograms(window, params, cells_x, cells_y);
  std::vector<float> descriptor;
  for_each_block(cells_x, cells_y, params, hist, [&](int, int, const std::vector<double>& block) {
    for (double v : block) descriptor.push_back(static_cast<float>(v));
  });
  return descriptor;
}

HogFeatureMap hog_feature_map(const ImageF32& img, const HogParams& params) {
  params.validate();
  require(img.channels() == 1, "hog_feature_map expects a gray image");
  HogFeatureMap map;
  map.cells_x = img.width() / params.cell_size;
  map.cells_y = img.height() / params.cell_size;
  map.bins = params.bins;
  map.values.assign(static_cast<std::size_t>(map.cells_x) * map.cells_y * map.bins, 0.0f);
  if (map.cells_x == 0 || map.cells_y == 0) return map;

  const auto hist = cell_histograms(img, params, map.cells_x, map.cells_y);
  std::vector<double> sum(map.values.size(), 0.0);
  std::vector<int> count(static_cast<std::size_t>(map.cells_x) * map.cells_y, 0);
  for_each_block(map.cells_x, map.cells_y, params, hist, [&](int bx, int by, const std::vector<double>& block) {
    std::size_t k = 0;
    for (int cy = by; cy < by + params.block_size; ++cy) {
      for (int cx = bx; cx < bx + params.block_size; ++cx) {
        const std::size_t cell = static_cast<std::size_t>(cy) * map.cells_x + cx;
        ++count[cell];
        for (int b = 0; b < params.bins; ++b) sum[cell * params.bins + static_cast<std::size_t>(b)] += block[k++];
      }
    }
  });
  for (std::size_t cell = 0; cell < count.size(); ++cell) {
    if (count[cell] == 0) continue;
    for (int b = 0; b < params.bins; ++b) {
      const std::size_t i = cell * params.bins + static_cast<std::size_t>(b);
      map.values[i] = static_cast<float>(sum[i] / count[cell]);
    }
  }
  return map;
}

HogTemplate parse_template(const std::string& text, ObjectClass cls) {
  std::istringstream in(text);
  HogTemplate templ;
  templ.cls = cls;
  if (!(in >> templ.cells_x >> templ.cells_y >> templ.bins >> templ.bias)) {
    fail(ErrorCode::Parse, "template header must be 'cells_x cells_y bins bias'");
  }
  if (templ.cells_x < 1 || templ.cells_y < 1 || templ.bins < 2) {
    fail(ErrorCode::Parse, "template header has invalid dimensions");
  }
  const std::size_t n = static_cast<std::size_t>(templ.cells_x) * templ.cells_y * templ.bins;
  templ.weights.reserve(n);
  double w = 0.0;
  while (in >> w) templ.weights.push_back(w);
  if (!in.eof()) fail(ErrorCode::Parse, "template contains a non-numeric weight");
  if (templ.weights.size() != n) {
    fail(ErrorCode::Parse, "template expects " + std::to_string(n) + " weights, found " +
                               std::to_string(templ.weights.size()));
  }
  return templ;
}

HogTemplate load_template(const std::filesystem::path& path, ObjectClass cls) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open template '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_template(buffer.str(), cls);
}

std::string format_template(const HogTemplate& templ) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << templ.cells_x << ' ' << templ.cells_y << ' ' << templ.bins << ' ' << templ.bias << '\n';
  for (double w : templ.weights) out << w << '\n';
  return out.str();
}

std::vector<Detection> score_template(const Pyramid& pyramid, const HogTemplate& templ,
                                      const HogParams& params, double score_threshold) {
  params.validate();
  require(!pyramid.levels.empty(), "score_template needs a non-empty pyramid");
  require(templ.bins == params.bins, "template bins do not match the HOG parameters");
  require(templ.weights.size() == static_cast<std::size_t>(templ.cells_x) * templ.cells_y * templ.bins,
          "template weight count does not match its dimensions");
  const ImageF32& coarsest = pyramid.levels.back();
  require(templ.cells_x <= coarsest.width() / params.cell_size &&
              templ.cells_y <= coarsest.height() / params.cell_size,
          "template is larger than the coarsest pyramid level");

  const ImageF32& base = pyramid.levels.front();
  std::vector<Detection> found;
  for (const ImageF32& level : pyramid.levels) {
    const HogFeatureMap map = hog_feature_map(level, params);
    const double sx = static_cast<double>(level.width()) / base.width();
    const double sy = static_cast<double>(level.height()) / base.height();
    for (int oy = 0; oy + templ.cells_y <= map.cells_y; ++oy) {
      for (int ox = 0; ox + templ.cells_x <= map.cells_x; ++ox) {
        double score = templ.bias;
        for (int cy = 0; cy < templ.cells_y; ++cy) {
          for (int cx = 0; cx < templ.cells_x; ++cx) {
            for (int b = 0; b < templ.bins; ++b) score += templ.weight(cx, cy, b) * map.at(ox + cx, oy + cy, b);
          }
        }
        if (!(score > score_threshold)) continue;
        Detection d;
        d.cls = templ.cls;
        d.score = score;
        d.bbox = {ox * params.cell_size / sx, oy * params.cell_size / sy,
                  templ.cells_x * params.cell_size / sx, templ.cells_y * params.cell_size / sy};
        found.push_back(d);
      }
    }
  }
  return non_maximum_suppression(std::move(found), 0.5);
}

}  // namespace rashdrive
