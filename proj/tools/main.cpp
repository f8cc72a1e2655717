#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "skelfuse/pipeline.hpp"

namespace {

struct GlobalOptions {
  std::optional<std::string> config_file;
  std::optional<uint64_t> seed;
  bool verbose = false;
};

skelfuse::PipelineConfig make_config(const GlobalOptions& g, CLI::App* cmd) {
  std::optional<skelfuse::fs::path> path;
  if (g.config_file) path = *g.config_file;
  skelfuse::PipelineConfig cfg = skelfuse::load_config(path);
  // Command-line flags take precedence over config-file values.
  if (cmd->count("--reference")) cfg.reference_sensor_id = cmd->get_option("--reference")->as<std::string>();
  if (cmd->count("--tick-rate")) cfg.tick_rate_hz = cmd->get_option("--tick-rate")->as<double>();
  if (cmd->count("--tau-hold-us")) cfg.tau_hold_us = cmd->get_option("--tau-hold-us")->as<int64_t>();
  if (cmd->count("--d-easy")) cfg.match.d_easy = cmd->get_option("--d-easy")->as<double>();
  if (cmd->count("--d-max")) cfg.match.d_max = cmd->get_option("--d-max")->as<double>();
  if (cmd->count("--r-person")) cfg.calibration.r_person_m = cmd->get_option("--r-person")->as<double>();
  if (cmd->count("--icp-runs")) cfg.calibration.icp_runs = cmd->get_option("--icp-runs")->as<int>();
  return cfg;
}

void add_pipeline_flags(CLI::App* cmd) {
  cmd->add_option("--reference", "reference sensor id (default: lowest sensor id)");
  cmd->add_option("--tick-rate", "fusion tick rate in Hz");
  cmd->add_option("--tau-hold-us", "one-sided body hold window in microseconds");
  cmd->add_option("--d-easy", "easy-match inter-pelvis threshold in meters");
  cmd->add_option("--d-max", "candidate inter-pelvis radius in meters");
  cmd->add_option("--r-person", "person-proximity cloud filter radius in meters");
  cmd->add_option("--icp-runs", "number of chained ICP runs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-sensor skeletal fusion toolkit"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_file, "pipeline config JSON file");
  app.add_option("--seed", global.seed, "override the scene RNG seed");
  app.add_flag("--verbose", global.verbose, "chatty diagnostics on stderr");

  std::string scene_file, out_dir, depth_pgm, meta_json, out_ply, session_dir, calibration_json,
      out_json, out_jsonl, fused_jsonl, ground_truth_json;
  std::string eval_session;

  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic session from a scene file");
  simulate->add_option("scene", scene_file, "scene description JSON")->required();
  simulate->add_option("out_dir", out_dir, "session output directory")->required();

  CLI::App* cloud = app.add_subcommand("cloud", "back-project a depth image into an ASCII PLY cloud");
  cloud->add_option("depth_pgm", depth_pgm, "16-bit binary PGM depth image")->required();
  cloud->add_option("meta_json", meta_json, "sidecar intrinsics/metadata JSON")->required();
  cloud->add_option("out_ply", out_ply, "output PLY path")->required();

  CLI::App* calibrate = app.add_subcommand("calibrate", "estimate per-sensor extrinsics from a session");
  calibrate->add_option("session_dir", session_dir, "recorded session directory")->required();
  calibrate->add_option("out_json", out_json, "calibration output JSON")->required();
  add_pipeline_flags(calibrate);

  CLI::App* fuse = app.add_subcommand("fuse", "match and merge skeleton streams into one fused stream");
  fuse->add_option("session_dir", session_dir, "recorded session directory")->required();
  fuse->add_option("calibration", calibration_json, "calibration JSON from 'calibrate'")->required();
  fuse->add_option("out_jsonl", out_jsonl, "fused stream output (JSON Lines)")->required();
  add_pipeline_flags(fuse);

  CLI::App* eval = app.add_subcommand("eval", "score a fused stream against simulator ground truth");
  eval->add_option("fused_jsonl", fused_jsonl, "fused stream")->required();
  eval->add_option("ground_truth", ground_truth_json, "ground truth JSON")->required();
  eval->add_option("--session-dir", eval_session, "session directory for per-sensor baselines");
  add_pipeline_flags(eval);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      const auto summary = skelfuse::cmd_simulate(scene_file, out_dir, global.seed);
      std::cerr << "simulate: " << summary.sensor_count << " sensors, " << summary.frames_per_sensor
                << " frames each, " << summary.depth_images << " depth images, seed " << summary.seed
                << "\n";
    } else if (cloud->parsed()) {
      const size_t n = skelfuse::cmd_cloud(depth_pgm, meta_json, out_ply);
      std::cerr << "cloud: wrote " << n << " points to " << out_ply << "\n";
    } else if (calibrate->parsed()) {
      const auto cfg = make_config(global, calibrate);
      const auto result = skelfuse::cmd_calibrate(session_dir, cfg, out_json);
      std::cerr << "calibrate: reference sensor '" << result.reference_sensor_id << "'\n";
      for (const auto& d : result.diagnostics) {
        std::cerr << "  " << d.sensor_id << ": icp rms " << d.icp_rms << " m after " << d.icp_iterations
                  << " iterations" << (d.icp_converged ? "" : " (not converged)") << "\n";
      }
    } else if (fuse->parsed()) {
      const auto cfg = make_config(global, fuse);
      const auto summary = skelfuse::cmd_fuse(session_dir, calibration_json, cfg, out_jsonl);
      std::cerr << "fuse: " << summary.ticks << " ticks over " << summary.sensor_count
                << " sensors, reference '" << summary.reference_sensor_id << "'\n";
    } else if (eval->parsed()) {
      const auto cfg = make_config(global, eval);
      std::optional<skelfuse::fs::path> session;
      if (!eval_session.empty()) session = eval_session;
      const auto report = skelfuse::cmd_eval(fused_jsonl, ground_truth_json, session, cfg);
      std::cout << report.dump(2) << std::endl;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
