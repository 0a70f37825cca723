#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "rashdrive/error.hpp"
#include "rashdrive/pipeline.hpp"

namespace rashdrive {

namespace {

using Color = std::array<float, 3>;

constexpr Color kLaneColor{0.0f, 1.0f, 0.0f};
constexpr Color kBoxColor{1.0f, 0.0f, 0.0f};
constexpr Color kFlowColor{1.0f, 1.0f, 0.0f};

void plot(ImageF32& img, int x, int y, const Color& color) {
  if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
  for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[static_cast<std::size_t>(c)];
}

// Bresenham segment, clipped per pixel.
void draw_line(ImageF32& img, int x0, int y0, int x1, int y1, const Color& color) {
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    plot(img, x0, y0, color);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

int round_px(double v) { return static_cast<int>(std::lround(v)); }

}  // namespace

ImageF32 render_overlay(const ImageF32& frame, const LaneModel& model, const Calibration& calib,
                        const BevSpec& bev, const std::vector<Detection>& detections,
                        const FlowOverlay& flow) {
  ImageF32 out(frame.width(), frame.height(), 3);
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = frame.at(x, y, frame.channels() == 3 ? c : 0);
    }
  }

  for (const auto& side : {model.left, model.right}) {
    if (!side) continue;
    std::optional<PixelPoint> previous;
    const int steps = std::max(2, static_cast<int>(std::ceil((bev.w_max - bev.w_min) / 0.25)));
    for (int i = 0; i <= steps; ++i) {
      const double w = bev.w_min + (bev.w_max - bev.w_min) * i / steps;
      std::optional<PixelPoint> current;
      try {
        current = project_point({side->at(w), 0.0, w}, calib);
      } catch (const Error&) {
        current.reset();
      }
      if (previous && current) {
        draw_line(out, round_px(previous->x), round_px(previous->y), round_px(current->x),
                  round_px(current->y), kLaneColor);
      }
      previous = current;
    }
  }

  for (const Detection& d : detections) {
    const int x0 = round_px(d.bbox.x);
    const int y0 = round_px(d.bbox.y);
    const int x1 = round_px(d.bbox.x + d.bbox.width) - 1;
    const int y1 = round_px(d.bbox.y + d.bbox.height) - 1;
    if (x1 < x0 || y1 < y0) continue;
    draw_line(out, x0, y0, x1, y0, kBoxColor);
    draw_line(out, x0, y1, x1, y1, kBoxColor);
    draw_line(out, x0, y0, x0, y1, kBoxColor);
    draw_line(out, x1, y0, x1, y1, kBoxColor);
  }

  if (flow.flow) {
    const FlowField& f = *flow.flow;
    require(f.width == frame.width() && f.height == frame.height(), "flow does not match the frame size");
    const int stride = std::max(1, flow.stride);
    for (int y = stride / 2; y < f.height; y += stride) {
      for (int x = stride / 2; x < f.width; x += stride) {
        const double u = f.u[f.index(x, y)];
        const double v = f.v[f.index(x, y)];
        if (std::hypot(u, v) < 0.5) continue;
        draw_line(out, x, y, round_px(x + 2.0 * u), round_px(y + 2.0 * v), kFlowColor);
      }
    }
  }
  return out;
}

}  // namespace rashdrive
