#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rashdrive/geometry.hpp"
#include "rashdrive/image.hpp"

namespace rashdrive {

enum class ObjectClass { Car, Person };

const char* to_string(ObjectClass cls) noexcept;
std::optional<ObjectClass> parse_object_class(const std::string& name);

struct Detection {
  int frame_index = 0;
  ObjectClass cls = ObjectClass::Car;
  BoundingBox bbox;
  double score = 0.0;
};

double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

// Greedy suppression in descending score order.
std::vector<Detection> non_maximum_suppression(std::vector<Detection> detections, double iou_threshold);

struct HogParams {
  int cell_size = 8;
  int bins = 9;        // unsigned orientations over [0, 180)
  int block_size = 2;  // cells per block side
  int block_stride = 1;
  double clip = 0.2;

  void validate() const;
};

// Dalal-Triggs descriptor of one window: blocks in row-major order, each block
// holding its cells row-major, each cell holding `bins` orientation votes.
std::vector<float> hog_features(const ImageF32& window, const HogParams& params);

// Dense per-cell features over a whole image. Each cell carries the average of
// its L2-Hys normalized histogram over every block that contains it.
struct HogFeatureMap {
  int cells_x = 0;
  int cells_y = 0;
  int bins = 0;
  std::vector<float> values;

  float at(int cx, int cy, int bin) const noexcept {
    return values[(static_cast<std::size_t>(cy) * cells_x + cx) * bins + bin];
  }
};

HogFeatureMap hog_feature_map(const ImageF32& img, const HogParams& params);

// Rigid root template over the cell feature map.
struct HogTemplate {
  int cells_x = 0;
  int cells_y = 0;
  int bins = 0;
  double bias = 0.0;
  std::vector<double> weights;  // (cy * cells_x + cx) * bins + bin
  ObjectClass cls = ObjectClass::Car;

  double weight(int cx, int cy, int bin) const noexcept {
    return weights[(static_cast<std::size_t>(cy) * cells_x + cx) * bins + bin];
  }
};

// Text format: first line `cells_x cells_y bins bias`, then one weight per line.
HogTemplate parse_template(const std::string& text, ObjectClass cls = ObjectClass::Car);
HogTemplate load_template(const std::filesystem::path& path, ObjectClass cls = ObjectClass::Car);
std::string format_template(const HogTemplate& templ);

// Sliding-window template score at every cell offset of every pyramid level.
// Windows scoring above `score_threshold` survive, mapped back to level-0
// pixels, then greedy NMS at IoU 0.5.
std::vector<Detection> score_template(const Pyramid& pyramid, const HogTemplate& templ,
                                      const HogParams& params, double score_threshold);

struct DetectionIssue {
  int line = 0;
  std::string message;
};

// Strict loader: the first malformed record aborts with an error naming its line.
std::map<int, std::vector<Detection>> load_detections(const std::filesystem::path& path);

// Lenient loader: malformed records are skipped and reported.
std::map<int, std::vector<Detection>> load_detections(const std::filesystem::path& path,
                                                      std::vector<DetectionIssue>& issues);

Detection parse_detection_line(const std::string& line, int line_number);

struct TrackEntry {
  int frame_index = 0;
  BoundingBox bbox;
  std::optional<WorldPoint> ground;   // foot point on the road
  std::optional<double> distance;     // forward distance incl. class offset, meters
  std::optional<double> lane_offset;  // meters right of the ego lane centre
};

struct Track {
  int id = 0;
  ObjectClass cls = ObjectClass::Car;
  std::vector<TrackEntry> history;
  int last_seen = 0;
  bool active = true;
};

// Greedy one-to-one association by descending IoU between each active track's
// latest box and same-class detections of `frame_index`. Unmatched detections
// open new tracks; tracks unseen for more than `max_gap` frames are closed.
// Returns, per detection, the id of the track it extended or opened.
std::vector<int> associate_tracks(std::vector<Track>& tracks, const std::vector<Detection>& detections,
                                  int frame_index, double iou_threshold = 0.3, int max_gap = 5);

}  // namespace rashdrive
