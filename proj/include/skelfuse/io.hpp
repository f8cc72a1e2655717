#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "skelfuse/calibration.hpp"
#include "skelfuse/merging.hpp"
#include "skelfuse/sensor_model.hpp"
#include "skelfuse/simulator.hpp"
#include "skelfuse/skeleton.hpp"

namespace skelfuse {

namespace fs = std::filesystem;

// Temp-file-plus-rename writers.
void write_text_atomic(const fs::path& path, const std::string& content);
void write_binary_atomic(const fs::path& path, const std::string& content);

// --- Depth images: binary PGM (P5, maxval 65535, big-endian samples) ---

void write_pgm16(const fs::path& path, int width, int height, const std::vector<uint16_t>& data);

struct Pgm16 {
  int width = 0;
  int height = 0;
  std::vector<uint16_t> data;
};

// Throws std::runtime_error on malformed files or maxval != 65535.
Pgm16 read_pgm16(const fs::path& path);

struct DepthMeta {
  Intrinsics intrinsics;
  std::string sensor_id;
  int64_t timestamp_us = 0;
};

void write_depth_meta(const fs::path& path, const DepthMeta& meta);
DepthMeta read_depth_meta(const fs::path& path);

// Loads a PGM + sidecar metadata pair into a DepthImage.
DepthImage load_depth(const fs::path& pgm_path, const fs::path& meta_path, DepthMeta* meta_out = nullptr);

// --- Point clouds: ASCII PLY, float x/y/z with 6 decimal digits ---

void write_ply(const fs::path& path, const PointCloud& cloud);
PointCloud read_ply(const fs::path& path);

// --- Skeleton streams: JSON Lines, one frame per line ---

nlohmann::json frame_to_json(const SkeletonFrame& f);
SkeletonFrame frame_from_json(const nlohmann::json& j);

void write_skeleton_stream(const fs::path& path, const std::vector<SkeletonFrame>& frames);

// Enforces a single sensor id and monotonically non-decreasing
// timestamps; throws std::runtime_error naming the offending line.
std::vector<SkeletonFrame> read_skeleton_stream(const fs::path& path);

// --- Calibration file ---

std::array<double, 16> to_mat4_row_major(const RigidTransform& t);
// Validates the rotation block and the exact (0,0,0,1) last row.
RigidTransform from_mat4_row_major(const std::array<double, 16>& m);

void write_calibration(const fs::path& path, const CalibrationResult& c);
CalibrationResult read_calibration(const fs::path& path);

// --- Fused stream: JSON Lines, one fused frame per line ---

nlohmann::json fused_frame_to_json(const FusedFrame& f, const std::string& reference_sensor_id);
FusedFrame fused_frame_from_json(const nlohmann::json& j, std::string* reference_sensor_id = nullptr);

void write_fused_stream(const fs::path& path, const std::string& reference_sensor_id,
                        const std::vector<FusedFrame>& frames);
std::vector<FusedFrame> read_fused_stream(const fs::path& path, std::string* reference_sensor_id = nullptr);

// --- Scene description ---

Scene read_scene(const fs::path& path);
void write_scene(const fs::path& path, const Scene& s);

// --- Ground truth ---

struct GroundTruthBody {
  int body_index = 0;
  std::vector<std::pair<JointId, Vec3>> joints;  // world frame, true positions
};

struct GroundTruthFrame {
  int64_t timestamp_us = 0;
  std::vector<GroundTruthBody> bodies;
};

struct GroundTruth {
  uint64_t seed = 0;
  int body_count = 0;
  std::vector<SensorExtrinsic> sensors;
  // sensor id -> per-sensor body id -> scene body index
  std::map<std::string, std::map<int, int>> body_ids;
  std::vector<GroundTruthFrame> frames;
};

void write_ground_truth(const fs::path& path, const GroundTruth& gt);
GroundTruth read_ground_truth(const fs::path& path);

}  // namespace skelfuse
