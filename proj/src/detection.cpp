#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "rashdrive/detection.hpp"
#include "rashdrive/error.hpp"

namespace rashdrive {

const char* to_string(ObjectClass cls) noexcept {
  return cls == ObjectClass::Car ? "car" : "person";
}

std::optional<ObjectClass> parse_object_class(const std::string& name) {
  if (name == "car") return ObjectClass::Car;
  if (name == "person") return ObjectClass::Person;
  return std::nullopt;
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double ix = std::max(0.0, std::min(a.x + a.width, b.x + b.width) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.height, b.y + b.height) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.width * a.height + b.width * b.height - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<Detection> non_maximum_suppression(std::vector<Detection> detections, double iou_threshold) {
  std::stable_sort(detections.begin(), detections.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  std::vector<Detection> kept;
  for (const Detection& d : detections) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return k.cls == d.cls && iou(k.bbox, d.bbox) > iou_threshold;
    });
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

Detection parse_detection_line(const std::string& line, int line_number) {
  const std::string where = "line " + std::to_string(line_number) + ": ";
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::Parse, where + "malformed JSON (" + e.what() + ")");
  }
  if (!record.is_object()) fail(ErrorCode::Parse, where + "expected a JSON object");

  const auto number = [&](const char* key) {
    const auto it = record.find(key);
    if (it == record.end() || !it->is_number()) fail(ErrorCode::Parse, where + "missing numeric field '" + key + "'");
    return it->get<double>();
  };
  Detection d;
  const auto frame = record.find("frame");
  if (frame == record.end() || !frame->is_number_integer()) {
    fail(ErrorCode::Parse, where + "missing integer field 'frame'");
  }
  if (frame->get<long long>() < 0) fail(ErrorCode::Validation, where + "frame must be non-negative");
  d.frame_index = frame->get<int>();

  const auto cls = record.find("class");
  if (cls == record.end() || !cls->is_string()) fail(ErrorCode::Parse, where + "missing string field 'class'");
  const auto parsed = parse_object_class(cls->get<std::string>());
  if (!parsed) fail(ErrorCode::Validation, where + "unknown class '" + cls->get<std::string>() + "'");
  d.cls = *parsed;
  d.bbox = {number("x"), number("y"), number("width"), number("height")};
  d.score = number("score");
  if (!(d.bbox.width > 0.0) || !(d.bbox.height > 0.0)) {
    fail(ErrorCode::Validation, where + "bounding box width and height must be positive");
  }
  return d;
}

namespace {

std::map<int, std::vector<Detection>> load(const std::filesystem::path& path,
                                           std::vector<DetectionIssue>* issues) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open detections '" + path.string() + "'");
  std::map<int, std::vector<Detection>> out;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Detection d = parse_detection_line(line, line_number);
      out[d.frame_index].push_back(d);
    } catch (const Error& e) {
      if (!issues) throw;
      issues->push_back({line_number, e.what()});
    }
  }
  return out;
}

}  // namespace

std::map<int, std::vector<Detection>> load_detections(const std::filesystem::path& path) {
  return load(path, nullptr);
}

std::map<int, std::vector<Detection>> load_detections(const std::filesystem::path& path,
                                                      std::vector<DetectionIssue>& issues) {
  return load(path, &issues);
}

}  // namespace rashdrive
