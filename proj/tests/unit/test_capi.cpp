#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rashdrive/rashdrive.h"

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("rashdrive_capi_" + name);
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

const char* kCalibration =
    "phi_x = 500\nphi_y = 500\ndelta_x = 320\ndelta_y = 240\n"
    "omega = 1 0 0 0 1 0 0 0 1\ntau = 0 0 0\nimage_width = 640\nimage_height = 480\n";

}  // namespace

TEST_CASE("calibration handle") {
  rd_calibration* calib = nullptr;
  REQUIRE(rd_calibration_load(write_temp("calib.txt", kCalibration).c_str(), &calib) == RD_OK);
  double x = 0, y = 0;
  CHECK(rd_project_point(calib, 1, 2, 4, &x, &y) == RD_OK);
  CHECK(x == 445.0);
  CHECK(y == 490.0);
  CHECK(rd_project_point(calib, 0, 0, -1, &x, &y) == RD_ERR_BEHIND_CAMERA);
  CHECK(std::string(rd_last_error()).size() > 0);
  CHECK(rd_project_point(calib, 0, 0, 1, nullptr, &y) == RD_ERR_INVALID_INPUT);
  rd_calibration_free(calib);

  rd_calibration* missing = nullptr;
  CHECK(rd_calibration_load("/nonexistent/calib.txt", &missing) == RD_ERR_IO);
  CHECK(missing == nullptr);
  CHECK(rd_calibration_load(write_temp("bad.txt", "phi_x = 1\n").c_str(), &missing) == RD_ERR_PARSE);
  CHECK(std::string(rd_status_string(RD_ERR_HORIZON)) == "horizon");
}

TEST_CASE("ground geometry through the handle") {
  // Level camera 1.5 m above the road: tau = (0, 1.5, 0).
  const std::string text =
      "phi_x = 500\nphi_y = 500\ndelta_x = 320\ndelta_y = 240\n"
      "omega = 1 0 0 0 1 0 0 0 1\ntau = 0 1.5 0\nimage_width = 640\nimage_height = 480\n";
  rd_calibration* calib = nullptr;
  REQUIRE(rd_calibration_load(write_temp("level.txt", text).c_str(), &calib) == RD_OK);
  double x = 0, y = 0, u = 0, w = 0;
  REQUIRE(rd_project_point(calib, 2, 0, 15, &x, &y) == RD_OK);
  REQUIRE(rd_backproject_ground(calib, x, y, &u, &w) == RD_OK);
  CHECK(u == doctest::Approx(2.0));
  CHECK(w == doctest::Approx(15.0));
  CHECK(rd_backproject_ground(calib, 320, 200, &u, &w) == RD_ERR_HORIZON);
  double d = 0;
  CHECK(rd_distance_to_object(calib, x - 10, y - 20, 20, 20, 0.5, &d) == RD_OK);
  CHECK(d == doctest::Approx(15.5));
  CHECK(rd_distance_to_object(calib, 300, 200, 40, 40, 0.0, &d) == RD_ERR_NOT_ON_GROUND);
  rd_calibration_free(calib);
}

TEST_CASE("config handle and flow") {
  rd_config* config = nullptr;
  REQUIRE(rd_config_create(&config) == RD_OK);
  CHECK(rd_config_set(config, "flow.lambda", "0.05") == RD_OK);
  CHECK(rd_config_set(config, "flow.lambda", "-1") == RD_ERR_INVALID_INPUT);
  CHECK(rd_config_set(config, "no.such.key", "1") == RD_ERR_PARSE);
  CHECK(rd_config_set_seed(config, 99) == RD_OK);

  const int w = 48, h = 40;
  std::vector<float> a(static_cast<std::size_t>(w * h)), u(a.size()), v(a.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) a[static_cast<std::size_t>(y * w + x)] = 0.5f + 0.3f * std::sin(0.3f * x) * std::cos(0.25f * y);
  }
  CHECK(rd_estimate_flow(config, a.data(), a.data(), w, h, u.data(), v.data()) == RD_OK);
  for (std::size_t i = 0; i < u.size(); ++i) {
    CHECK(std::abs(u[i]) <= 0.1f);
    CHECK(std::abs(v[i]) <= 0.1f);
  }
  CHECK(rd_estimate_flow(config, a.data(), a.data(), 8, 8, u.data(), v.data()) == RD_ERR_INVALID_INPUT);
  rd_config_free(config);

  rd_config* loaded = nullptr;
  CHECK(rd_config_load(write_temp("config.txt", "fps = 0\n").c_str(), &loaded) == RD_ERR_INVALID_INPUT);
  CHECK(loaded == nullptr);
}

TEST_CASE("summary json") {
  rd_summary s{};
  s.frames = 3;
  s.pairs_processed = 2;
  s.rash_frames = 1;
  s.rash_verdict_events = 1;
  s.proximity_events = 2;
  const std::size_t n = rd_summary_json(&s, nullptr, 0);
  std::string buf(n, '\0');
  CHECK(rd_summary_json(&s, buf.data(), n + 1) == n);
  CHECK(buf == R"({"frames":3,"pairs_processed":2,"rash_frames":1,"events":{"proximity":2,"rash_verdict":1},"status":"ok"})");
  char tiny[8];
  CHECK(rd_summary_json(&s, tiny, sizeof(tiny)) == n);
  CHECK(std::string(tiny) == std::string(buf, 0, 7));
}
