#include "rashdrive/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <regex>

#include <json.hpp>

#include "rashdrive/error.hpp"
#include "rashdrive/netpbm.hpp"

namespace rashdrive {

using nlohmann::ordered_json;

std::string PipelineSummary::to_json() const {
  ordered_json j;
  j["frames"] = frames;
  j["pairs_processed"] = pairs_processed;
  j["rash_frames"] = rash_frames;
  j["events"] = ordered_json::object();
  for (const auto& [type, count] : events_by_type) j["events"][type] = count;
  j["status"] = partial ? "partial" : "ok";
  return j.dump();
}

std::vector<std::pair<int, std::filesystem::path>> list_frames(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) fail(ErrorCode::Io, "frames directory '" + dir.string() + "' not found");
  static const std::regex name(R"(^(\d+)\.(pgm|ppm)$)");
  std::vector<std::pair<int, std::filesystem::path>> frames;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::smatch m;
    const std::string file = entry.path().filename().string();
    if (!std::regex_match(file, m, name)) continue;
    frames.emplace_back(std::stoi(m[1].str()), entry.path());
  }
  std::sort(frames.begin(), frames.end());
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].first == frames[i - 1].first) {
      fail(ErrorCode::InvalidInput, "duplicate frame index " + std::to_string(frames[i].first));
    }
  }
  return frames;
}

namespace {

ordered_json distance_json(double d) { return std::isfinite(d) ? ordered_json(d) : ordered_json(nullptr); }

ordered_json features_json(const BehaviorFeatures& f) {
  ordered_json j;
  j["forward_accel_proxy"] = f.forward_accel_proxy;
  j["lateral_accel_proxy"] = f.lateral_accel_proxy;
  j["wrong_direction_score"] = f.wrong_direction_score;
  j["lane_changes_in_window"] = f.lane_changes_in_window;
  j["min_car_distance"] = distance_json(f.min_car_distance);
  j["min_person_distance"] = distance_json(f.min_person_distance);
  j["departure_angle"] = f.departure_angle;
  return j;
}

class EventWriter {
 public:
  EventWriter(const std::filesystem::path& path, PipelineSummary& summary)
      : out_(path, std::ios::binary | std::ios::trunc), summary_(summary) {
    if (!out_) fail(ErrorCode::Io, "cannot open events file '" + path.string() + "'");
  }

  void emit(int frame, const std::string& type, ordered_json payload = ordered_json::object()) {
    ordered_json j;
    j["frame"] = frame;
    j["type"] = type;
    for (auto& [key, value] : payload.items()) j[key] = value;
    out_ << j.dump() << '\n';
    ++summary_.events_by_type[type];
    if (type == "error") summary_.partial = true;
  }

 private:
  std::ofstream out_;
  PipelineSummary& summary_;
};

ImageF32 to_gray(const ImageF32& img) { return img.channels() == 1 ? img : to_grayscale(img); }

bool intersects_image(const BoundingBox& b, int width, int height) {
  return b.x < width && b.y < height && b.x + b.width > 0.0 && b.y + b.height > 0.0;
}

// Pyramid depth that keeps the template inside the coarsest level.
int template_levels(const ImageF32& gray, const HogTemplate& templ, const PipelineConfig& config) {
  int levels = 1;
  while (levels < config.template_pyramid_levels) {
    const int w = pyramid_level_size(gray.width(), 0.5, levels);
    const int h = pyramid_level_size(gray.height(), 0.5, levels);
    if (w < 16 || h < 16 || w / config.hog.cell_size < templ.cells_x || h / config.hog.cell_size < templ.cells_y) break;
    ++levels;
  }
  return levels;
}

}  // namespace

PipelineSummary run_pipeline(const PipelineConfig& config, const PipelinePaths& paths) {
  config.validate();
  const Calibration calib = load_calibration(paths.calibration);
  const auto frames = list_frames(paths.frames_dir);
  if (frames.size() < 2) fail(ErrorCode::InvalidInput, "need at least two numbered frames in '" + paths.frames_dir.string() + "'");

  std::map<int, std::vector<Detection>> external;
  std::vector<DetectionIssue> detection_issues;
  std::optional<HogTemplate> templ;
  if (config.detection_source == DetectionSource::ExternalJsonl) {
    if (paths.detections) external = load_detections(*paths.detections, detection_issues);
  } else {
    templ = load_template(config.template_path, config.template_class);
    require(templ->bins == config.hog.bins, "template bins do not match hog.bins");
  }
  if (paths.overlay_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*paths.overlay_dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create overlay directory '" + paths.overlay_dir->string() + "'");
  }
  const ImageF32 first_frame = read_pnm(frames.front().second);
  if (first_frame.width() != calib.image_width || first_frame.height() != calib.image_height) {
    fail(ErrorCode::InvalidInput, "frame size does not match the calibration image size");
  }

  PipelineSummary summary;
  summary.frames = static_cast<int>(frames.size());
  EventWriter events(paths.events_out, summary);
  for (const DetectionIssue& issue : detection_issues) {
    events.emit(frames.front().first, "error", {{"source", "detections"}, {"line", issue.line}, {"message", issue.message}});
  }

  const int window_frames = std::max(2, static_cast<int>(std::lround(config.thresholds.window_seconds * config.fps)));
  LaneChangeParams lane_change{config.lanes.default_lane_width, config.lane_change_hysteresis};
  std::vector<Track> tracks;
  std::map<int, LaneModel> lane_history;
  std::map<int, int> crossings_seen;
  std::vector<RegionSample> previous_regions;
  std::optional<ImageF32> previous = first_frame;

  for (std::size_t k = 1; k < frames.size(); ++k) {
    const int frame_index = frames[k].first;
    ImageF32 current;
    try {
      current = read_pnm(frames[k].second);
      require(current.width() == calib.image_width && current.height() == calib.image_height,
              "frame size does not match the calibration image size");
    } catch (const Error& e) {
      events.emit(frame_index, "error", {{"source", "frame"}, {"message", e.what()}});
      previous.reset();
      continue;
    }
    if (!previous) {
      previous = std::move(current);
      continue;
    }

    const ImageF32 gray_prev = to_gray(*previous);
    const ImageF32 gray_cur = to_gray(current);
    const FlowField flow = estimate_flow(gray_prev, gray_cur, config.flow);

    RansacParams ransac = config.ransac;
    ransac.seed = derive_seed(config.seed, "ransac", static_cast<std::uint64_t>(frame_index));
    const LaneModel lanes = [&] {
      LaneModel m = detect_lanes(current, calib, config.bev, ransac, config.lanes);
      m.frame_index = frame_index;
      return m;
    }();
    lane_history[frame_index] = lanes;
    while (!lane_history.empty() && lane_history.begin()->first <= frame_index - window_frames) {
      lane_history.erase(lane_history.begin());
    }

    std::vector<Detection> detections;
    if (templ) {
      const Pyramid pyramid = build_pyramid(gray_cur, template_levels(gray_cur, *templ, config), 0.5);
      detections = score_template(pyramid, *templ, config.hog, config.template_score_threshold);
      for (Detection& d : detections) d.frame_index = frame_index;
    } else if (const auto it = external.find(frame_index); it != external.end()) {
      for (const Detection& d : it->second) {
        if (intersects_image(d.bbox, calib.image_width, calib.image_height)) {
          detections.push_back(d);
        } else {
          events.emit(frame_index, "error", {{"source", "detections"}, {"message", "bounding box lies outside the image"}});
        }
      }
    }

    associate_tracks(tracks, detections, frame_index, config.track_iou_threshold, config.track_max_gap);
    for (Track& track : tracks) {
      if (track.history.empty() || track.history.back().frame_index != frame_index) continue;
      TrackEntry& entry = track.history.back();
      const double offset = track.cls == ObjectClass::Car ? config.car_distance_offset : config.person_distance_offset;
      entry.ground = try_backproject_ground(entry.bbox.foot_point(), calib);
      if (!entry.ground) continue;
      entry.distance = distance_to_object(entry.bbox, calib, offset);
      if (!lanes.empty()) {
        entry.lane_offset = assign_lane(entry.ground->u, lanes, entry.ground->w, config.lanes.default_lane_width).offset;
      }
    }

    FeatureInputs inputs;
    inputs.frame_index = frame_index;
    inputs.fps = config.fps;
    inputs.flow = &flow;
    inputs.lanes = &lanes;
    inputs.calib = &calib;
    inputs.bev = &config.bev;
    inputs.tracks = tracks;
    inputs.lane_history = &lane_history;
    inputs.previous_regions = previous_regions;
    inputs.lane_change_window = window_frames;
    inputs.expected_flow_sign = config.expected_flow_sign;
    inputs.departure_evaluation_w = config.departure_evaluation_w;
    inputs.lane_change = lane_change;
    FeatureResult result = compute_features(inputs);
    previous_regions = std::move(result.regions);
    const Verdict verdict = classify_rash(result.features, config.thresholds);
    const BehaviorFeatures& f = verdict.features;

    // New boundary crossings over each track's full history.
    for (const Track& track : tracks) {
      if (track.history.empty() || track.history.back().frame_index != frame_index) continue;
      const int total = count_lane_changes(track, lane_history, std::numeric_limits<int>::max() / 2, lane_change);
      int& seen = crossings_seen[track.id];
      if (total > seen && track.history.back().lane_offset) {
        events.emit(frame_index, "lane_change",
                    {{"track", track.id}, {"crossings", total}, {"offset", *track.history.back().lane_offset}});
      }
      seen = std::max(seen, total);
    }
    const auto fired = [&](const char* name) {
      return std::find(verdict.triggered_rules.begin(), verdict.triggered_rules.end(), name) != verdict.triggered_rules.end();
    };
    if (fired(rule::kWrongDirection)) events.emit(frame_index, "wrong_direction", {{"score", f.wrong_direction_score}});
    if (fired(rule::kCarProximity)) {
      events.emit(frame_index, "proximity", {{"class", "car"}, {"distance", f.min_car_distance}, {"track", f.closest_car_track}});
    }
    if (fired(rule::kPersonProximity)) {
      events.emit(frame_index, "proximity", {{"class", "person"}, {"distance", f.min_person_distance}});
    }
    if (fired(rule::kForwardAccel)) events.emit(frame_index, "accel", {{"axis", "forward"}, {"value", f.forward_accel_proxy}});
    if (fired(rule::kLateralAccel)) events.emit(frame_index, "accel", {{"axis", "lateral"}, {"value", f.lateral_accel_proxy}});
    if (verdict.rash) {
      ++summary.rash_frames;
      const int culprit = f.closest_car_track >= 0 && fired(rule::kCarProximity) ? f.closest_car_track : f.lane_change_track;
      events.emit(frame_index, "rash_verdict",
                  {{"rules", verdict.triggered_rules},
                   {"track", culprit >= 0 ? ordered_json(culprit) : ordered_json(nullptr)},
                   {"features", features_json(f)}});
    }

    if (paths.overlay_dir) {
      char name[32];
      std::snprintf(name, sizeof(name), "%06d.ppm", frame_index);
      try {
        write_pnm(*paths.overlay_dir / name,
                  render_overlay(current, lanes, calib, config.bev, detections, {&flow, config.overlay_flow_stride}));
      } catch (const Error& e) {
        events.emit(frame_index, "error", {{"source", "overlay"}, {"message", e.what()}});
      }
    }

    ++summary.pairs_processed;
    previous = std::move(current);
  }
  return summary;
}

}  // namespace rashdrive
