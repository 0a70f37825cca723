#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rashdrive/config.hpp"

namespace rashdrive {

struct PipelineSummary {
  int frames = 0;
  int pairs_processed = 0;
  int rash_frames = 0;
  std::map<std::string, int> events_by_type;
  bool partial = false;  // some frame-level step failed; see the error events

  std::string to_json() const;
};

struct PipelinePaths {
  std::filesystem::path frames_dir;
  std::filesystem::path calibration;
  std::optional<std::filesystem::path> detections;
  std::filesystem::path events_out;
  std::optional<std::filesystem::path> overlay_dir;
};

// Numbered frames (`000042.pgm` / `.ppm`) of a directory in index order.
std::vector<std::pair<int, std::filesystem::path>> list_frames(const std::filesystem::path& dir);

// Runs the per-frame-pair analysis and writes one JSON event per line to
// paths.events_out. Startup problems throw before anything is written.
PipelineSummary run_pipeline(const PipelineConfig& config, const PipelinePaths& paths);

struct FlowOverlay {
  const FlowField* flow = nullptr;
  int stride = 16;
};

// Draws lane boundaries (projected back from the road model), detection boxes
// and sparse flow arrows over a copy of the frame, returned as RGB.
ImageF32 render_overlay(const ImageF32& frame, const LaneModel& model, const Calibration& calib,
                        const BevSpec& bev, const std::vector<Detection>& detections,
                        const FlowOverlay& flow);

}  // namespace rashdrive
