#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skelfuse/sensor_model.hpp"
#include "skelfuse/skeleton.hpp"

namespace skelfuse {

struct AabbBox {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
};

struct BodyWaypoint {
  int64_t t_us = 0;
  Vec3 position = Vec3::Zero();  // pelvis, world frame
  double heading_rad = 0;        // yaw about world +Z
};

// Stick figure with a fixed bone table; joints follow the pelvis pose
// deterministically. The trajectory is piecewise linear over the
// waypoints and clamped outside them.
struct BodyModel {
  std::vector<BodyWaypoint> waypoints;
};

struct BodyPose {
  Vec3 position = Vec3::Zero();
  double heading_rad = 0;
};

BodyPose body_pose_at(const BodyModel& b, int64_t t_us);

// World-frame skeleton, every joint High confidence; body_id is left 0.
Skeleton body_joints(const BodyModel& b, int64_t t_us);

// Occlusion capsules of the stick figure, world frame.
struct Capsule {
  Vec3 p0, p1;
  double radius;
};

std::vector<Capsule> body_capsules(const BodyModel& b, int64_t t_us);

struct SensorModel {
  std::string sensor_id;
  Intrinsics intrinsics;
  RigidTransform extrinsic;  // sensor frame -> world frame
  int64_t phase_offset_us = 0;
  double max_range_m = 5.0;
};

struct SimNoiseModel {
  double joint_pos_sigma_m = 0;
  double axis_sigma_rad = 0;
  double depth_sigma_mm = 0;
  // Confidence rule: unobstructed joints are High; joints whose view ray
  // crosses a prop or another body get `occluded_confidence` and
  // `occlusion_noise_factor` times the position noise; joints outside
  // the frustum or beyond max range are None. Bodies whose pelvis is
  // None are dropped.
  Confidence occluded_confidence = Confidence::Low;
  double occlusion_noise_factor = 3.0;
  uint64_t seed = 0;
};

struct Scene {
  bool floor = true;  // plane z = 0
  std::vector<AabbBox> boxes;
  std::vector<BodyModel> bodies;
  std::vector<SensorModel> sensors;
  SimNoiseModel noise;
  double duration_s = 1.0;
  double fps = 30.0;
  std::vector<int64_t> calibration_times_us;  // depth captures near these instants
};

const SensorModel& find_sensor(const Scene& s, const std::string& sensor_id);

// Ray casting against floor, boxes and body capsules; nearest hit per
// pixel as sensor-frame z in noisy integer millimeters, 0 where nothing
// is in range.
DepthImage render_depth(const Scene& s, const std::string& sensor_id, int64_t t_us);

// Noisy sensor-frame skeleton observations with the confidence rule
// applied. Body ids are stable per sensor.
SkeletonFrame observe_skeletons(const Scene& s, const std::string& sensor_id, int64_t t_us);

struct SessionSummary {
  int sensor_count = 0;
  int frames_per_sensor = 0;
  int depth_images = 0;
  uint64_t seed = 0;
};

// Writes per-sensor skeleton streams (skeleton_<id>.jsonl), depth PGM +
// metadata pairs at the frames nearest each calibration instant, and
// ground_truth.json. Fully reproducible from the scene seed.
SessionSummary generate_session(const Scene& s, const std::filesystem::path& out_dir);

// Intersection helpers (exposed for tests).
std::optional<double> intersect_ray_box(const Vec3& origin, const Vec3& dir, const AabbBox& box);
std::optional<double> intersect_ray_plane_z0(const Vec3& origin, const Vec3& dir);
std::optional<double> intersect_ray_capsule(const Vec3& origin, const Vec3& dir, const Capsule& c);
bool segment_hits_box(const Vec3& a, const Vec3& b, const AabbBox& box);
bool segment_hits_capsule(const Vec3& a, const Vec3& b, const Capsule& c);

}  // namespace skelfuse
