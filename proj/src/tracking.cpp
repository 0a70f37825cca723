#include <algorithm>
#include <tuple>

#include "rashdrive/detection.hpp"
#include "rashdrive/error.hpp"

namespace rashdrive {

std::vector<int> associate_tracks(std::vector<Track>& tracks, const std::vector<Detection>& detections,
                                  int frame_index, double iou_threshold, int max_gap) {
  require(iou_threshold >= 0.0 && iou_threshold <= 1.0, "IoU threshold must lie in [0,1]");
  require(max_gap >= 0, "max_gap must be non-negative");
  for (const Detection& d : detections) {
    require(d.frame_index == frame_index, "detections passed to associate_tracks mix frame indices");
  }
  for (Track& t : tracks) {
    require(t.history.empty() || t.history.back().frame_index < frame_index,
            "track history would not be strictly increasing");
    if (t.active && frame_index - t.last_seen > max_gap) t.active = false;
  }

  struct Candidate {
    double overlap;
    std::size_t track;
    std::size_t detection;
  };
  std::vector<Candidate> candidates;
  for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
    const Track& t = tracks[ti];
    if (!t.active || t.history.empty()) continue;
    for (std::size_t di = 0; di < detections.size(); ++di) {
      if (detections[di].cls != t.cls) continue;
      const double overlap = iou(t.history.back().bbox, detections[di].bbox);
      if (overlap >= iou_threshold && overlap > 0.0) candidates.push_back({overlap, ti, di});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    return std::make_tuple(-a.overlap, tracks[a.track].id, a.detection) <
           std::make_tuple(-b.overlap, tracks[b.track].id, b.detection);
  });

  std::vector<int> assigned(detections.size(), -1);
  std::vector<bool> track_used(tracks.size(), false);
  for (const Candidate& c : candidates) {
    if (track_used[c.track] || assigned[c.detection] != -1) continue;
    track_used[c.track] = true;
    Track& t = tracks[c.track];
    t.history.push_back({frame_index, detections[c.detection].bbox, std::nullopt, std::nullopt, std::nullopt});
    t.last_seen = frame_index;
    assigned[c.detection] = t.id;
  }

  int next_id = 0;
  for (const Track& t : tracks) next_id = std::max(next_id, t.id + 1);
  for (std::size_t di = 0; di < detections.size(); ++di) {
    if (assigned[di] != -1) continue;
    Track t;
    t.id = next_id++;
    t.cls = detections[di].cls;
    t.history.push_back({frame_index, detections[di].bbox, std::nullopt, std::nullopt, std::nullopt});
    t.last_seen = frame_index;
    assigned[di] = t.id;
    tracks.push_back(std::move(t));
  }
  return assigned;
}

}  // namespace rashdrive
