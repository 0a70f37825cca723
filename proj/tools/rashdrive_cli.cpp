// rashdrive command line: driving-behaviour analysis over a frame sequence.
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rashdrive/rashdrive.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStartup = 1;
constexpr int kExitPartial = 2;

int report(rd_status status, const char* what) {
  std::cerr << "rashdrive: " << what << ": " << rd_status_string(status) << ": " << rd_last_error() << '\n';
  return kExitStartup;
}

struct ConfigHandle {
  rd_config* ptr = nullptr;
  ~ConfigHandle() { rd_config_free(ptr); }
};

rd_status open_config(const std::string& path, std::optional<std::uint64_t> seed, ConfigHandle& out) {
  rd_status st = path.empty() ? rd_config_create(&out.ptr) : rd_config_load(path.c_str(), &out.ptr);
  if (st == RD_OK && seed) st = rd_config_set_seed(out.ptr, *seed);
  return st;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rash-driving analysis over numbered camera frames"};
  app.require_subcommand(1);

  std::string frames_dir, calib_path, config_path, detections_path, events_path, overlay_dir;
  std::optional<std::uint64_t> seed;
  auto* analyze = app.add_subcommand("analyze", "Analyze a frame sequence and write JSONL events");
  analyze->add_option("--frames", frames_dir, "Directory of numbered .pgm/.ppm frames")->required();
  analyze->add_option("--calib", calib_path, "Camera calibration file")->required();
  analyze->add_option("--config", config_path, "Pipeline configuration file")->required();
  analyze->add_option("--detections", detections_path, "External detections (JSONL)");
  analyze->add_option("--out", events_path, "Events output file (JSONL)")->required();
  analyze->add_option("--overlay-dir", overlay_dir, "Write annotated frames here");
  analyze->add_option("--seed", seed, "Override the configured seed");

  std::string first_path, second_path, flow_out, flow_config;
  auto* flow = app.add_subcommand("flow", "Dense optical flow between two frames, written as RFLO");
  flow->add_option("first", first_path, "First frame")->required();
  flow->add_option("second", second_path, "Second frame")->required();
  flow->add_option("--out", flow_out, "Output flow file")->required();
  flow->add_option("--config", flow_config, "Pipeline configuration file (flow.* keys)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitStartup;
  }

  if (*flow) {
    ConfigHandle config;
    if (rd_status st = open_config(flow_config, std::nullopt, config); st != RD_OK) return report(st, "config");
    if (rd_status st = rd_flow_dump(config.ptr, first_path.c_str(), second_path.c_str(), flow_out.c_str()); st != RD_OK) {
      return report(st, "flow");
    }
    return kExitOk;
  }

  ConfigHandle config;
  if (rd_status st = open_config(config_path, seed, config); st != RD_OK) return report(st, "config");
  rd_summary summary{};
  const rd_status st = rd_analyze(config.ptr, frames_dir.c_str(), calib_path.c_str(),
                                  detections_path.empty() ? nullptr : detections_path.c_str(), events_path.c_str(),
                                  overlay_dir.empty() ? nullptr : overlay_dir.c_str(), &summary);
  if (st != RD_OK) return report(st, "analyze");

  std::string json(rd_summary_json(&summary, nullptr, 0), '\0');
  rd_summary_json(&summary, json.data(), json.size() + 1);
  std::cout << json << std::endl;
  return summary.partial ? kExitPartial : kExitOk;
}
