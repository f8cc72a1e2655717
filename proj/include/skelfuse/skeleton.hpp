#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skelfuse/geometry.hpp"

namespace skelfuse {

enum class Confidence { None = 0, Low = 1, Medium = 2, High = 3 };

const char* to_string(Confidence c);
Confidence confidence_from_string(const std::string& s);

// Reduced 12-joint set; the pelvis anchors matching and filtering.
enum class JointId {
  Pelvis = 0,
  SpineChest,
  Neck,
  Head,
  ShoulderL,
  ShoulderR,
  ElbowL,
  ElbowR,
  HandL,
  HandR,
  FootL,
  FootR,
};

inline constexpr int kJointCount = 12;

const char* to_string(JointId id);
JointId joint_id_from_string(const std::string& s);

struct Joint {
  JointId id = JointId::Pelvis;
  Vec3 position = Vec3::Zero();   // meters
  AxisTriad axes;                 // orientation basis, world or sensor frame
  Confidence confidence = Confidence::None;
};

struct Skeleton {
  int body_id = 0;
  std::vector<Joint> joints;

  const Joint* find(JointId id) const;
  // Throws std::runtime_error when the pelvis joint is missing.
  const Joint& pelvis() const;
};

// Throws std::invalid_argument on duplicate joint ids or missing pelvis.
void validate(const Skeleton& s);

struct SkeletonFrame {
  std::string sensor_id;
  int64_t timestamp_us = 0;
  std::vector<Skeleton> skeletons;
};

// Throws std::invalid_argument on duplicate body ids or invalid skeletons.
void validate(const SkeletonFrame& f);

struct TrackingAreaConfig {
  double min_sensor_distance = 0.5;  // meters
  std::vector<Vec2> area_polygon;    // floor-plane vertices; empty = unbounded
};

// Ray-casting parity test; points on the boundary count as inside.
bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& polygon);

// Maps every joint position by t and rotates the orientation axes;
// ids and confidences are untouched.
Skeleton transform_skeleton(const RigidTransform& t, const Skeleton& s);
SkeletonFrame transform_frame(const RigidTransform& t, const SkeletonFrame& f);

inline constexpr int64_t kDefaultTauHoldUs = 50000;

// Aligns two frames of one sensor to time t_us. Bodies present in both
// frames are interpolated (axes re-orthonormalized, per-joint confidence
// is the minimum of the endpoints); bodies present in only one frame are
// copied from it when that frame is within tau_hold_us of t, else
// dropped. At t exactly equal to an endpoint the shared bodies are
// copied from that frame verbatim.
SkeletonFrame interpolate_frames(const SkeletonFrame& f0, const SkeletonFrame& f1, int64_t t_us,
                                 int64_t tau_hold_us = kDefaultTauHoldUs);

// Drops skeletons whose pelvis is closer than min_sensor_distance to the
// sensor origin or whose pelvis floor projection falls outside the area
// polygon. The frame must already be in world coordinates.
SkeletonFrame filter_skeletons(const SkeletonFrame& f, const RigidTransform& sensor_pose,
                               const TrackingAreaConfig& cfg);

}  // namespace skelfuse
