#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "skelfuse/calibration.hpp"
#include "skelfuse/matching.hpp"
#include "skelfuse/merging.hpp"
#include "skelfuse/simulator.hpp"

namespace skelfuse {

namespace fs = std::filesystem;

struct PipelineConfig {
  CalibrationParams calibration;
  MatchConfig match;
  TrackingAreaConfig tracking_area;
  WeightTable weights;
  double tick_rate_hz = 30.0;
  int64_t tau_hold_us = kDefaultTauHoldUs;
  std::string reference_sensor_id;  // empty = lowest sensor id
};

// Defaults overlaid with the JSON config file when given.
PipelineConfig load_config(const std::optional<fs::path>& path);

// --- Recorded sessions on disk ---

struct SessionDepth {
  fs::path pgm_path;
  fs::path meta_path;
  int64_t timestamp_us = 0;
};

struct SessionSensor {
  std::string sensor_id;
  std::vector<SkeletonFrame> frames;
  std::vector<SessionDepth> depths;  // sorted by timestamp
};

struct Session {
  std::vector<SessionSensor> sensors;  // sorted by sensor id
};

Session load_session(const fs::path& dir);

// Interpolated frame of one sensor stream at time t.
SkeletonFrame stream_at(const SessionSensor& sensor, int64_t t_us, int64_t tau_hold_us);

// --- CLI commands ---

SessionSummary cmd_simulate(const fs::path& scene_file, const fs::path& out_dir,
                            std::optional<uint64_t> seed_override);

// Returns the number of points written.
size_t cmd_cloud(const fs::path& depth_pgm, const fs::path& meta_json, const fs::path& out_ply);

CalibrationResult cmd_calibrate(const fs::path& session_dir, const PipelineConfig& config,
                                const fs::path& out_json);

struct FuseSummary {
  int ticks = 0;
  int sensor_count = 0;
  std::string reference_sensor_id;
};

FuseSummary cmd_fuse(const fs::path& session_dir, const fs::path& calibration_json,
                     const PipelineConfig& config, const fs::path& out_jsonl);

// Metrics of a fused stream against simulator ground truth; per-sensor
// baselines are included when the session directory is given.
nlohmann::json cmd_eval(const fs::path& fused_jsonl, const fs::path& ground_truth_json,
                        const std::optional<fs::path>& session_dir, const PipelineConfig& config);

}  // namespace skelfuse
