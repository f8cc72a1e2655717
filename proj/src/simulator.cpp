#include "skelfuse/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "skelfuse/io.hpp"
#include "skelfuse/rng.hpp"

namespace skelfuse {

namespace {

struct JointOffset {
  JointId id;
  Vec3 local;  // body frame: +X right, +Y forward, +Z up, pelvis at origin
};

const std::array<JointOffset, kJointCount> kBoneTable = {{
    {JointId::Pelvis, {0, 0, 0}},
    {JointId::SpineChest, {0, 0, 0.30}},
    {JointId::Neck, {0, 0, 0.50}},
    {JointId::Head, {0, 0, 0.65}},
    {JointId::ShoulderL, {-0.20, 0, 0.45}},
    {JointId::ShoulderR, {0.20, 0, 0.45}},
    {JointId::ElbowL, {-0.30, 0.02, 0.20}},
    {JointId::ElbowR, {0.30, 0.02, 0.20}},
    {JointId::HandL, {-0.33, 0.06, -0.03}},
    {JointId::HandR, {0.33, 0.06, -0.03}},
    {JointId::FootL, {-0.12, 0.02, -0.93}},
    {JointId::FootR, {0.12, 0.02, -0.93}},
}};

struct CapsuleSpec {
  Vec3 p0, p1;
  double radius;
};

const std::array<CapsuleSpec, 8> kCapsuleTable = {{
    {{0, 0, 0}, {0, 0, 0.50}, 0.13},                    // torso
    {{0, 0, 0.50}, {0, 0, 0.70}, 0.10},                 // head
    {{-0.20, 0, 0.45}, {-0.30, 0.02, 0.20}, 0.05},      // upper arm L
    {{0.20, 0, 0.45}, {0.30, 0.02, 0.20}, 0.05},        // upper arm R
    {{-0.30, 0.02, 0.20}, {-0.33, 0.06, -0.03}, 0.04},  // forearm L
    {{0.30, 0.02, 0.20}, {0.33, 0.06, -0.03}, 0.04},    // forearm R
    {{-0.10, 0, -0.02}, {-0.12, 0.02, -0.93}, 0.07},    // leg L
    {{0.10, 0, -0.02}, {0.12, 0.02, -0.93}, 0.07},      // leg R
}};

constexpr uint64_t kDepthStream = 0xd390a11eull;
constexpr uint64_t kSkeletonStream = 0x5ce1e70full;

}  // namespace

BodyPose body_pose_at(const BodyModel& b, int64_t t_us) {
  if (b.waypoints.empty()) throw std::invalid_argument("body has no waypoints");
  const auto& ws = b.waypoints;
  if (t_us <= ws.front().t_us) return {ws.front().position, ws.front().heading_rad};
  if (t_us >= ws.back().t_us) return {ws.back().position, ws.back().heading_rad};
  for (size_t i = 0; i + 1 < ws.size(); ++i) {
    if (t_us > ws[i + 1].t_us) continue;
    const int64_t span = ws[i + 1].t_us - ws[i].t_us;
    const double alpha = span == 0 ? 0.0 : static_cast<double>(t_us - ws[i].t_us) / static_cast<double>(span);
    return {ws[i].position + alpha * (ws[i + 1].position - ws[i].position),
            ws[i].heading_rad + alpha * (ws[i + 1].heading_rad - ws[i].heading_rad)};
  }
  return {ws.back().position, ws.back().heading_rad};
}

Skeleton body_joints(const BodyModel& b, int64_t t_us) {
  const BodyPose pose = body_pose_at(b, t_us);
  const Mat3 heading = rotation_z(pose.heading_rad);
  Skeleton s;
  s.joints.reserve(kJointCount);
  for (const JointOffset& bone : kBoneTable) {
    Joint j;
    j.id = bone.id;
    j.position = pose.position + heading * bone.local;
    j.axes = rotation_to_triad(heading);
    j.confidence = Confidence::High;
    s.joints.push_back(j);
  }
  return s;
}

std::vector<Capsule> body_capsules(const BodyModel& b, int64_t t_us) {
  const BodyPose pose = body_pose_at(b, t_us);
  const Mat3 heading = rotation_z(pose.heading_rad);
  std::vector<Capsule> out;
  out.reserve(kCapsuleTable.size());
  for (const CapsuleSpec& c : kCapsuleTable) {
    out.push_back({pose.position + heading * c.p0, pose.position + heading * c.p1, c.radius});
  }
  return out;
}

const SensorModel& find_sensor(const Scene& s, const std::string& sensor_id) {
  for (const SensorModel& m : s.sensors) {
    if (m.sensor_id == sensor_id) return m;
  }
  throw std::runtime_error("unknown sensor '" + sensor_id + "'");
}

// --- Intersections ---

std::optional<double> intersect_ray_plane_z0(const Vec3& origin, const Vec3& dir) {
  if (std::abs(dir.z()) < 1e-15) return std::nullopt;
  const double t = -origin.z() / dir.z();
  if (t <= 0) return std::nullopt;
  return t;
}

std::optional<double> intersect_ray_box(const Vec3& origin, const Vec3& dir, const AabbBox& box) {
  double t0 = 0, t1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(dir[i]) < 1e-15) {
      if (origin[i] < box.min[i] || origin[i] > box.max[i]) return std::nullopt;
      continue;
    }
    double ta = (box.min[i] - origin[i]) / dir[i];
    double tb = (box.max[i] - origin[i]) / dir[i];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  const double t = t0 > 0 ? t0 : t1;  // origin inside the box sees the far wall
  if (t <= 0) return std::nullopt;
  return t;
}

std::optional<double> intersect_ray_capsule(const Vec3& origin, const Vec3& dir, const Capsule& c) {
  std::optional<double> best;
  auto consider = [&best](double t) {
    if (t > 0 && (!best || t < *best)) best = t;
  };
  auto sphere = [&](const Vec3& center) {
    const Vec3 oc = origin - center;
    const double b = dir.dot(oc);
    const double h = b * b - (oc.squaredNorm() - c.radius * c.radius);
    if (h < 0) return;
    consider(-b - std::sqrt(h));
    consider(-b + std::sqrt(h));
  };

  const Vec3 ba = c.p1 - c.p0;
  const double baba = ba.squaredNorm();
  if (baba > 1e-18) {
    const Vec3 oa = origin - c.p0;
    const double bard = ba.dot(dir);
    const double baoa = ba.dot(oa);
    const double a = baba - bard * bard;
    const double b = baba * dir.dot(oa) - baoa * bard;
    const double cc = baba * oa.squaredNorm() - baoa * baoa - c.radius * c.radius * baba;
    const double h = b * b - a * cc;
    if (h >= 0 && std::abs(a) > 1e-14) {
      for (const double t : {(-b - std::sqrt(h)) / a, (-b + std::sqrt(h)) / a}) {
        const double y = baoa + t * bard;
        if (y >= 0 && y <= baba) consider(t);
      }
    }
  }
  sphere(c.p0);
  sphere(c.p1);
  return best;
}

bool segment_hits_box(const Vec3& a, const Vec3& b, const AabbBox& box) {
  const Vec3 d = b - a;
  double t0 = 0, t1 = 1;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (a[i] < box.min[i] || a[i] > box.max[i]) return false;
      continue;
    }
    double ta = (box.min[i] - a[i]) / d[i];
    double tb = (box.max[i] - a[i]) / d[i];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

namespace {

// Squared distance between segments p1->q1 and p2->q2 (Ericson 5.1.9).
double segment_segment_dist2(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  const Vec3 d1 = q1 - p1;
  const Vec3 d2 = q2 - p2;
  const Vec3 r = p1 - p2;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0, t = 0;
  if (a <= 1e-18 && e <= 1e-18) {
    return r.squaredNorm();
  }
  if (a <= 1e-18) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-18) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      if (denom > 1e-18) s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
      t = (b * s + f) / e;
      if (t < 0) {
        t = 0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1) {
        t = 1;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + d1 * s) - (p2 + d2 * t)).squaredNorm();
}

}  // namespace

bool segment_hits_capsule(const Vec3& a, const Vec3& b, const Capsule& c) {
  return segment_segment_dist2(a, b, c.p0, c.p1) < c.radius * c.radius;
}

// --- Rendering and observation ---

DepthImage render_depth(const Scene& s, const std::string& sensor_id, int64_t t_us) {
  const SensorModel& sm = find_sensor(s, sensor_id);
  validate(sm.intrinsics);
  int sensor_index = 0;
  for (size_t i = 0; i < s.sensors.size(); ++i) {
    if (s.sensors[i].sensor_id == sensor_id) sensor_index = static_cast<int>(i);
  }

  std::vector<Capsule> capsules;
  for (const BodyModel& body : s.bodies) {
    for (const Capsule& c : body_capsules(body, t_us)) capsules.push_back(c);
  }

  const Intrinsics& k = sm.intrinsics;
  const Vec3 origin = sm.extrinsic.translation;
  DepthImage img;
  img.intrinsics = k;
  img.data.assign(static_cast<size_t>(k.width) * k.height, 0);

  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const Vec3 dir_sensor((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      const double inv_norm = 1.0 / dir_sensor.norm();
      const Vec3 dir_world = sm.extrinsic.rotation * (dir_sensor * inv_norm);

      double t_hit = std::numeric_limits<double>::infinity();
      if (s.floor) {
        if (auto t = intersect_ray_plane_z0(origin, dir_world)) t_hit = std::min(t_hit, *t);
      }
      for (const AabbBox& box : s.boxes) {
        if (auto t = intersect_ray_box(origin, dir_world, box)) t_hit = std::min(t_hit, *t);
      }
      for (const Capsule& c : capsules) {
        if (auto t = intersect_ray_capsule(origin, dir_world, c)) t_hit = std::min(t_hit, *t);
      }
      if (!std::isfinite(t_hit)) continue;

      const double z_m = t_hit * inv_norm;  // sensor-frame depth of the hit
      if (z_m > sm.max_range_m) continue;

      double depth_mm = z_m * 1000.0;
      if (s.noise.depth_sigma_mm > 0) {
        Rng rng(Rng::mix({s.noise.seed, kDepthStream, static_cast<uint64_t>(sensor_index),
                          static_cast<uint64_t>(t_us),
                          static_cast<uint64_t>(v) * static_cast<uint64_t>(k.width) + u}));
        depth_mm += rng.normal(s.noise.depth_sigma_mm);
      }
      const long rounded = std::lround(depth_mm);
      img.data[static_cast<size_t>(v) * k.width + u] =
          static_cast<uint16_t>(std::clamp(rounded, 1L, 65535L));
    }
  }
  return img;
}

SkeletonFrame observe_skeletons(const Scene& s, const std::string& sensor_id, int64_t t_us) {
  const SensorModel& sm = find_sensor(s, sensor_id);
  validate(sm.intrinsics);
  int sensor_index = 0;
  for (size_t i = 0; i < s.sensors.size(); ++i) {
    if (s.sensors[i].sensor_id == sensor_id) sensor_index = static_cast<int>(i);
  }
  const RigidTransform world_to_sensor = invert(sm.extrinsic);
  const Vec3 sensor_pos = sm.extrinsic.translation;

  // Occluders per body: props plus every other body's capsules.
  std::vector<std::vector<Capsule>> capsules_by_body;
  for (const BodyModel& body : s.bodies) capsules_by_body.push_back(body_capsules(body, t_us));

  SkeletonFrame frame;
  frame.sensor_id = sensor_id;
  frame.timestamp_us = t_us;

  for (size_t bi = 0; bi < s.bodies.size(); ++bi) {
    const Skeleton world_skel = body_joints(s.bodies[bi], t_us);
    Skeleton obs;
    obs.body_id = (sensor_index + 1) * 100 + static_cast<int>(bi);
    bool pelvis_tracked = false;

    for (size_t ji = 0; ji < world_skel.joints.size(); ++ji) {
      const Joint& truth = world_skel.joints[ji];
      const Vec3 p_sensor = world_to_sensor.apply(truth.position);

      Confidence conf = Confidence::High;
      bool occluded = false;
      if (!project(p_sensor, sm.intrinsics) || p_sensor.z() > sm.max_range_m) {
        conf = Confidence::None;
      } else {
        for (const AabbBox& box : s.boxes) {
          if (segment_hits_box(sensor_pos, truth.position, box)) {
            occluded = true;
            break;
          }
        }
        for (size_t oi = 0; oi < capsules_by_body.size() && !occluded; ++oi) {
          if (oi == bi) continue;
          for (const Capsule& c : capsules_by_body[oi]) {
            if (segment_hits_capsule(sensor_pos, truth.position, c)) {
              occluded = true;
              break;
            }
          }
        }
        if (occluded) conf = s.noise.occluded_confidence;
      }

      Rng rng(Rng::mix({s.noise.seed, kSkeletonStream, static_cast<uint64_t>(sensor_index),
                        static_cast<uint64_t>(t_us), bi, ji}));
      const double sigma =
          s.noise.joint_pos_sigma_m * (occluded ? s.noise.occlusion_noise_factor : 1.0);

      Joint j;
      j.id = truth.id;
      j.position = p_sensor + rng.normal_vec3(sigma);
      const Mat3 perturb = s.noise.axis_sigma_rad > 0
                               ? rotation_about(rng.unit_vec3(), rng.normal(s.noise.axis_sigma_rad))
                               : Mat3::Identity();
      const Mat3 axes = perturb * world_to_sensor.rotation * triad_to_rotation(truth.axes);
      j.axes = rotation_to_triad(axes);
      j.confidence = conf;
      if (j.id == JointId::Pelvis && conf != Confidence::None) pelvis_tracked = true;
      obs.joints.push_back(j);
    }

    if (pelvis_tracked) frame.skeletons.push_back(std::move(obs));
  }
  return frame;
}

SessionSummary generate_session(const Scene& s, const std::filesystem::path& out_dir) {
  if (!(s.fps > 0)) throw std::invalid_argument("generate_session: fps must be positive");
  std::filesystem::create_directories(out_dir);

  const int64_t period_us = std::llround(1e6 / s.fps);
  const int n_frames = static_cast<int>(std::lround(s.duration_s * s.fps));

  SessionSummary summary;
  summary.sensor_count = static_cast<int>(s.sensors.size());
  summary.frames_per_sensor = n_frames;
  summary.seed = s.noise.seed;

  for (const SensorModel& sm : s.sensors) {
    std::vector<SkeletonFrame> frames;
    frames.reserve(n_frames);
    for (int i = 0; i < n_frames; ++i) {
      frames.push_back(observe_skeletons(s, sm.sensor_id, sm.phase_offset_us + i * period_us));
    }
    write_skeleton_stream(out_dir / ("skeleton_" + sm.sensor_id + ".jsonl"), frames);
  }

  for (const int64_t t_cal : s.calibration_times_us) {
    for (const SensorModel& sm : s.sensors) {
      // Depth is captured at the sensor's own frame closest to the
      // marked instant; captures stay shifted across sensors.
      int64_t i = n_frames == 0 ? 0 : std::llround(static_cast<double>(t_cal - sm.phase_offset_us) /
                                                   static_cast<double>(period_us));
      i = std::clamp<int64_t>(i, 0, std::max(0, n_frames - 1));
      const int64_t t_frame = sm.phase_offset_us + i * period_us;
      const DepthImage img = render_depth(s, sm.sensor_id, t_frame);
      const std::string stem = "depth_" + sm.sensor_id + "_" + std::to_string(t_frame);
      write_pgm16(out_dir / (stem + ".pgm"), img.intrinsics.width, img.intrinsics.height, img.data);
      write_depth_meta(out_dir / (stem + ".json"), {img.intrinsics, sm.sensor_id, t_frame});
      summary.depth_images += 1;
    }
  }

  GroundTruth gt;
  gt.seed = s.noise.seed;
  gt.body_count = static_cast<int>(s.bodies.size());
  for (const SensorModel& sm : s.sensors) gt.sensors.push_back({sm.sensor_id, sm.extrinsic});
  for (size_t si = 0; si < s.sensors.size(); ++si) {
    for (size_t bi = 0; bi < s.bodies.size(); ++bi) {
      gt.body_ids[s.sensors[si].sensor_id][static_cast<int>((si + 1) * 100 + bi)] = static_cast<int>(bi);
    }
  }
  // One extra frame so every phase-shifted capture stays in range.
  for (int i = 0; i <= n_frames; ++i) {
    GroundTruthFrame f;
    f.timestamp_us = i * period_us;
    for (size_t bi = 0; bi < s.bodies.size(); ++bi) {
      GroundTruthBody b;
      b.body_index = static_cast<int>(bi);
      for (const Joint& j : body_joints(s.bodies[bi], f.timestamp_us).joints) {
        b.joints.emplace_back(j.id, j.position);
      }
      f.bodies.push_back(std::move(b));
    }
    gt.frames.push_back(std::move(f));
  }
  write_ground_truth(out_dir / "ground_truth.json", gt);
  return summary;
}

}  // namespace skelfuse
