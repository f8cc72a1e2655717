#include "skelfuse/skeleton.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace skelfuse {

const char* to_string(Confidence c) {
  switch (c) {
    case Confidence::None: return "none";
    case Confidence::Low: return "low";
    case Confidence::Medium: return "medium";
    case Confidence::High: return "high";
  }
  throw std::invalid_argument("bad confidence value");
}

Confidence confidence_from_string(const std::string& s) {
  if (s == "none") return Confidence::None;
  if (s == "low") return Confidence::Low;
  if (s == "medium") return Confidence::Medium;
  if (s == "high") return Confidence::High;
  throw std::invalid_argument("unknown confidence '" + s + "'");
}

namespace {
constexpr const char* kJointNames[kJointCount] = {
    "pelvis", "spine_chest", "neck",   "head",   "shoulder_l", "shoulder_r",
    "elbow_l", "elbow_r",    "hand_l", "hand_r", "foot_l",     "foot_r",
};
}

const char* to_string(JointId id) { return kJointNames[static_cast<int>(id)]; }

JointId joint_id_from_string(const std::string& s) {
  for (int i = 0; i < kJointCount; ++i) {
    if (s == kJointNames[i]) return static_cast<JointId>(i);
  }
  throw std::invalid_argument("unknown joint id '" + s + "'");
}

const Joint* Skeleton::find(JointId id) const {
  for (const Joint& j : joints) {
    if (j.id == id) return &j;
  }
  return nullptr;
}

const Joint& Skeleton::pelvis() const {
  const Joint* j = find(JointId::Pelvis);
  if (!j) throw std::runtime_error("skeleton has no pelvis joint");
  return *j;
}

void validate(const Skeleton& s) {
  std::set<JointId> seen;
  for (const Joint& j : s.joints) {
    if (!seen.insert(j.id).second) {
      throw std::invalid_argument("skeleton: duplicate joint '" + std::string(to_string(j.id)) + "'");
    }
  }
  if (!seen.count(JointId::Pelvis)) throw std::invalid_argument("skeleton: missing pelvis joint");
}

void validate(const SkeletonFrame& f) {
  std::set<int> ids;
  for (const Skeleton& s : f.skeletons) {
    if (!ids.insert(s.body_id).second) {
      throw std::invalid_argument("frame: duplicate body id " + std::to_string(s.body_id));
    }
    validate(s);
  }
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& polygon) {
  const size_t n = polygon.size();
  bool inside = false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = polygon[j];
    const Vec2& b = polygon[i];
    // Boundary counts as inside.
    const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    if (cross == 0.0 && p.x() >= std::min(a.x(), b.x()) && p.x() <= std::max(a.x(), b.x()) &&
        p.y() >= std::min(a.y(), b.y()) && p.y() <= std::max(a.y(), b.y())) {
      return true;
    }
    if ((b.y() > p.y()) != (a.y() > p.y()) &&
        p.x() < (a.x() - b.x()) * (p.y() - b.y()) / (a.y() - b.y()) + b.x()) {
      inside = !inside;
    }
  }
  return inside;
}

Skeleton transform_skeleton(const RigidTransform& t, const Skeleton& s) {
  Skeleton out = s;
  for (Joint& j : out.joints) {
    j.position = t.apply(j.position);
    j.axes.x = t.rotation * j.axes.x;
    j.axes.y = t.rotation * j.axes.y;
    j.axes.z = t.rotation * j.axes.z;
  }
  return out;
}

SkeletonFrame transform_frame(const RigidTransform& t, const SkeletonFrame& f) {
  SkeletonFrame out = f;
  for (Skeleton& s : out.skeletons) s = transform_skeleton(t, s);
  return out;
}

namespace {

Vec3 lerp(const Vec3& a, const Vec3& b, double alpha) {
  if (alpha == 0.0) return a;
  if (alpha == 1.0) return b;
  return a + alpha * (b - a);
}

Joint interpolate_joint(const Joint& j0, const Joint& j1, double alpha) {
  Joint out = j0;
  out.position = lerp(j0.position, j1.position, alpha);
  const Vec3 x = lerp(j0.axes.x, j1.axes.x, alpha);
  const Vec3 y = lerp(j0.axes.y, j1.axes.y, alpha);
  const Vec3 z = lerp(j0.axes.z, j1.axes.z, alpha);
  try {
    out.axes = orthonormalize(x, y, z);
  } catch (const std::runtime_error&) {
    // Antipodal endpoint axes; fall back to the nearer endpoint.
    out.axes = alpha <= 0.5 ? j0.axes : j1.axes;
  }
  out.confidence = std::min(j0.confidence, j1.confidence);
  return out;
}

Skeleton interpolate_skeleton(const Skeleton& s0, const Skeleton& s1, double alpha) {
  Skeleton out;
  out.body_id = s0.body_id;
  for (const Joint& j0 : s0.joints) {
    const Joint* j1 = s1.find(j0.id);
    out.joints.push_back(j1 ? interpolate_joint(j0, *j1, alpha) : j0);
  }
  for (const Joint& j1 : s1.joints) {
    if (!s0.find(j1.id)) out.joints.push_back(j1);
  }
  return out;
}

}  // namespace

SkeletonFrame interpolate_frames(const SkeletonFrame& f0, const SkeletonFrame& f1, int64_t t_us,
                                 int64_t tau_hold_us) {
  if (f0.sensor_id != f1.sensor_id) {
    throw std::invalid_argument("interpolate_frames: mixed sensors '" + f0.sensor_id + "' and '" + f1.sensor_id + "'");
  }
  if (f0.timestamp_us > f1.timestamp_us) {
    throw std::invalid_argument("interpolate_frames: frames out of order");
  }
  if (t_us < f0.timestamp_us || t_us > f1.timestamp_us) {
    throw std::invalid_argument("interpolate_frames: t outside [t0, t1]");
  }
  const int64_t span = f1.timestamp_us - f0.timestamp_us;
  const double alpha = span == 0 ? 0.0 : static_cast<double>(t_us - f0.timestamp_us) / static_cast<double>(span);

  std::unordered_map<int, const Skeleton*> in_f1;
  for (const Skeleton& s : f1.skeletons) in_f1[s.body_id] = &s;

  SkeletonFrame out;
  out.sensor_id = f0.sensor_id;
  out.timestamp_us = t_us;
  for (const Skeleton& s0 : f0.skeletons) {
    auto it = in_f1.find(s0.body_id);
    if (it != in_f1.end()) {
      if (alpha == 0.0) {
        out.skeletons.push_back(s0);
      } else if (alpha == 1.0) {
        out.skeletons.push_back(*it->second);
      } else {
        out.skeletons.push_back(interpolate_skeleton(s0, *it->second, alpha));
      }
    } else if (t_us - f0.timestamp_us <= tau_hold_us) {
      out.skeletons.push_back(s0);  // hold from the frame that saw it
    }
  }
  for (const Skeleton& s1 : f1.skeletons) {
    bool only_in_f1 = true;
    for (const Skeleton& s0 : f0.skeletons) {
      if (s0.body_id == s1.body_id) {
        only_in_f1 = false;
        break;
      }
    }
    if (only_in_f1 && f1.timestamp_us - t_us <= tau_hold_us) out.skeletons.push_back(s1);
  }
  return out;
}

SkeletonFrame filter_skeletons(const SkeletonFrame& f, const RigidTransform& sensor_pose,
                               const TrackingAreaConfig& cfg) {
  SkeletonFrame out;
  out.sensor_id = f.sensor_id;
  out.timestamp_us = f.timestamp_us;
  for (const Skeleton& s : f.skeletons) {
    const Vec3& p = s.pelvis().position;
    if ((p - sensor_pose.translation).norm() < cfg.min_sensor_distance) continue;
    if (!cfg.area_polygon.empty() && !point_in_polygon({p.x(), p.y()}, cfg.area_polygon)) continue;
    out.skeletons.push_back(s);
  }
  return out;
}

}  // namespace skelfuse
