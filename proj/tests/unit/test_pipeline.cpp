#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "rashdrive/config.hpp"
#include "rashdrive/error.hpp"
#include "rashdrive/pipeline.hpp"
#include "support/sequence.hpp"

using namespace rashdrive;

namespace {

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("rashdrive_unit_" + name);
}

std::vector<nlohmann::json> read_events(const std::filesystem::path& path) {
  std::vector<nlohmann::json> events;
  std::istringstream in(rdtest::read_file(path));
  for (std::string line; std::getline(in, line);) events.push_back(nlohmann::json::parse(line));
  return events;
}

int changed_pixels(const ImageF32& a, const ImageF32& b) {
  int n = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      bool diff = false;
      for (int c = 0; c < 3; ++c) diff = diff || a.at(x, y, c) != b.at(x, y, c);
      n += diff ? 1 : 0;
    }
  }
  return n;
}

}  // namespace

TEST_CASE("config parsing") {
  const PipelineConfig defaults = parse_config("");
  CHECK(defaults.flow.lambda == FlowParams{}.lambda);
  CHECK(defaults.detection_source == DetectionSource::ExternalJsonl);

  const PipelineConfig c = parse_config(
      "fps = 25\nseed = 77\nflow.lambda = 0.1\nbev.w_max = 30\nthresholds.votes_required = 2\n"
      "detection.source = internal-template\ndetection.template = car.tmpl\ndistance.offset.car = 0.5\n",
      "/models");
  CHECK(c.fps == 25.0);
  CHECK(c.seed == 77);
  CHECK(c.flow.lambda == 0.1);
  CHECK(c.bev.w_max == 30.0);
  CHECK(c.thresholds.votes_required == 2);
  CHECK(c.detection_source == DetectionSource::InternalTemplate);
  CHECK(c.template_path == std::filesystem::path("/models/car.tmpl"));
  CHECK(c.car_distance_offset == 0.5);

  CHECK_THROWS_AS(parse_config("flow.lamda = 1\n"), Error);
  CHECK_THROWS_AS(parse_config("fps = fast\n"), Error);
  CHECK_THROWS_AS(parse_config("fps = -1\n"), Error);
  CHECK_THROWS_AS(parse_config("flow.pyramid_levels = 2.5\n"), Error);
  CHECK_THROWS_AS(parse_config("bev.w_min = 50\n"), Error);
  CHECK_THROWS_AS(parse_config("behavior.expected_flow_sign = 0\n"), Error);

  PipelineConfig mutable_config;
  mutable_config.set("ransac.iterations", "50");
  CHECK(mutable_config.ransac.iterations == 50);
}

TEST_CASE("seed streams") {
  CHECK(derive_seed(1, "ransac", 3) == derive_seed(1, "ransac", 3));
  CHECK(derive_seed(1, "ransac", 3) != derive_seed(1, "ransac", 4));
  CHECK(derive_seed(1, "ransac", 3) != derive_seed(2, "ransac", 3));
  CHECK(derive_seed(1, "ransac", 3) != derive_seed(1, "hog", 3));
}

TEST_CASE("overlay drawing") {
  const Calibration calib = rdtest::dash_camera();
  const ImageF32 frame = rdtest::render_road(calib, rdtest::straight_lanes());
  const BevSpec bev{-5, 5, 4, 25, 0.1};

  const ImageF32 plain = render_overlay(frame, LaneModel{}, calib, bev, {}, {});
  CHECK(changed_pixels(plain, frame) == 0);
  const FlowField still(320, 240);
  CHECK(changed_pixels(render_overlay(frame, LaneModel{}, calib, bev, {}, {&still, 16}), frame) == 0);

  Detection d;
  d.bbox = {100, 80, 30, 20};
  const ImageF32 boxed = render_overlay(frame, LaneModel{}, calib, bev, {d}, {});
  CHECK(changed_pixels(boxed, frame) <= 2 * 30 + 2 * 20 - 4);
  for (int x = 100; x < 130; ++x) {
    CHECK(boxed.at(x, 80, 0) == 1.0f);
    CHECK(boxed.at(x, 99, 1) == 0.0f);
  }
  for (int y = 81; y < 99; ++y) {
    for (int x = 101; x < 129; ++x) CHECK(boxed.at(x, y, 1) == frame.at(x, y, 1));
  }

  LaneModel lanes;
  lanes.left = Parabola{0, 0, -1.8};
  lanes.right = Parabola{0, 0, 1.8};
  const ImageF32 drawn = render_overlay(ImageF32(320, 240, 3), lanes, calib, bev, {}, {});
  int checked = 0;
  for (int y = 0; y < 240; ++y) {
    for (int x = 0; x < 320; ++x) {
      if (drawn.at(x, y, 1) != 1.0f) continue;
      const auto g = try_backproject_ground({static_cast<double>(x), static_cast<double>(y)}, calib);
      REQUIRE(g.has_value());
      // Within one BEV pixel of the nearer boundary.
      const double target = g->u < 0 ? -1.8 : 1.8;
      CHECK(std::abs(g->u - target) <= bev.meters_per_pixel);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("two static frames") {
  const auto seq = rdtest::write_sequence(scratch("static"), 2, [](int) { return std::optional<rdtest::Car>{}; });
  const PipelineConfig config = load_config(seq.config);
  PipelinePaths paths{seq.frames, seq.calibration, std::nullopt, seq.root / "events.jsonl", seq.root / "overlay"};
  const PipelineSummary s = run_pipeline(config, paths);
  CHECK(s.frames == 2);
  CHECK(s.pairs_processed == 1);
  CHECK(s.rash_frames == 0);
  CHECK_FALSE(s.partial);
  CHECK(read_events(paths.events_out).empty());
  CHECK(std::filesystem::exists(seq.root / "overlay" / "000001.ppm"));
  CHECK(s.to_json() == R"({"frames":2,"pairs_processed":1,"rash_frames":0,"events":{},"status":"ok"})");
}

TEST_CASE("startup failures leave no output") {
  const auto seq = rdtest::write_sequence(scratch("startup"), 2, [](int) { return std::optional<rdtest::Car>{}; });
  const auto events = seq.root / "events.jsonl";
  PipelineConfig bad = load_config(seq.config);
  bad.fps = 0.0;
  CHECK_THROWS_AS(run_pipeline(bad, {seq.frames, seq.calibration, std::nullopt, events, std::nullopt}), Error);
  CHECK_FALSE(std::filesystem::exists(events));

  const PipelineConfig good = load_config(seq.config);
  CHECK_THROWS_AS(run_pipeline(good, {seq.frames, seq.root / "missing.txt", std::nullopt, events, std::nullopt}), Error);
  CHECK_THROWS_AS(run_pipeline(good, {seq.root / "nowhere", seq.calibration, std::nullopt, events, std::nullopt}), Error);
  CHECK_FALSE(std::filesystem::exists(events));
}

TEST_CASE("bad detection records make a partial run") {
  const auto seq = rdtest::write_sequence(scratch("partial"), 3, rdtest::calm_car);
  std::string records = rdtest::read_file(seq.detections);
  records += "{\"frame\":2,\"class\":\"bus\",\"x\":1,\"y\":1,\"width\":4,\"height\":4,\"score\":1}\n";
  records += "{\"frame\":2,\"class\":\"car\",\"x\":900,\"y\":900,\"width\":4,\"height\":4,\"score\":1}\n";
  rdtest::write_text(seq.detections, records);
  PipelinePaths paths{seq.frames, seq.calibration, seq.detections, seq.root / "events.jsonl", std::nullopt};
  const PipelineSummary s = run_pipeline(load_config(seq.config), paths);
  CHECK(s.partial);
  CHECK(s.pairs_processed == 2);
  const auto events = read_events(paths.events_out);
  int errors = 0;
  int last_frame = -1;
  for (const auto& e : events) {
    CHECK(e["frame"].get<int>() >= last_frame);
    last_frame = e["frame"].get<int>();
    errors += e["type"] == "error" ? 1 : 0;
  }
  CHECK(errors == 2);
  CHECK(s.events_by_type.at("error") == 2);
}

TEST_CASE("frame listing") {
  const auto dir = scratch("listing");
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  for (const char* name : {"10.pgm", "000002.ppm", "notes.txt", "3.png", "0001.pgm"}) rdtest::write_text(dir / name, "");
  const auto frames = list_frames(dir);
  REQUIRE(frames.size() == 3);
  CHECK(frames[0].first == 1);
  CHECK(frames[1].first == 2);
  CHECK(frames[2].first == 10);
  rdtest::write_text(dir / "02.pgm", "");
  CHECK_THROWS_AS(list_frames(dir), Error);
}
