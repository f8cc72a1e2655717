#include "skelfuse/calibration.hpp"

#include <cmath>
#include <stdexcept>

#include "skelfuse/kdtree.hpp"

namespace skelfuse {

void validate(const IcpParams& p) {
  if (p.max_iterations < 1) throw std::invalid_argument("icp: max_iterations must be >= 1");
  if (!(p.convergence_eps > 0)) throw std::invalid_argument("icp: convergence_eps must be positive");
  if (p.max_correspondence_dist < 0 || p.downsample_cell < 0) {
    throw std::invalid_argument("icp: distances must be non-negative");
  }
}

RigidTransform estimate_from_skeletons(const Skeleton& sa, const Skeleton& sb, Confidence min_conf) {
  std::vector<Mat3> rotations;
  std::vector<Vec3> translations;
  for (const Joint& ja : sa.joints) {
    const Joint* jb = sb.find(ja.id);
    if (!jb) continue;
    if (ja.confidence < min_conf || jb->confidence < min_conf) continue;
    // Per-joint pose in each sensor frame; their relative transform maps
    // sensor-B coordinates into sensor-A coordinates.
    const Mat3 ra = triad_to_rotation(ja.axes);
    const Mat3 rb = triad_to_rotation(jb->axes);
    const Mat3 r = ra * rb.transpose();
    rotations.push_back(r);
    translations.push_back(ja.position - r * jb->position);
  }
  if (rotations.size() < 3) {
    throw std::runtime_error("estimate_from_skeletons: only " + std::to_string(rotations.size()) +
                             " joints qualify (need 3)");
  }
  return {average_rotations(rotations), average_translations(translations)};
}

IcpResult icp(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
              const IcpParams& params) {
  validate(params);
  PointCloud src = source;
  PointCloud tgt = target;
  if (params.downsample_cell > 0) {
    src = voxel_downsample(src, params.downsample_cell);
    tgt = voxel_downsample(tgt, params.downsample_cell);
  }
  if (src.empty() || tgt.empty()) {
    throw std::runtime_error("icp: empty cloud after downsampling");
  }

  const KdTree3 tree(tgt.points);
  const double max_d2 = params.max_correspondence_dist > 0
                            ? params.max_correspondence_dist * params.max_correspondence_dist
                            : std::numeric_limits<double>::infinity();

  IcpResult result;
  result.transform = init;
  double prev_rms = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < params.max_iterations; ++iter) {
    std::vector<std::pair<Vec3, Vec3>> pairs;
    pairs.reserve(src.points.size());
    for (const Vec3& p : src.points) {
      const auto [idx, d2] = tree.nearest(result.transform.apply(p));
      if (d2 <= max_d2) pairs.emplace_back(p, tgt.points[idx]);
    }
    if (pairs.empty()) {
      throw std::runtime_error("icp: diverged, all correspondences rejected at iteration " +
                               std::to_string(iter + 1));
    }
    result.transform = align_least_squares(pairs);

    double sq_sum = 0;
    for (const auto& [s, d] : pairs) sq_sum += (result.transform.apply(s) - d).squaredNorm();
    const double rms = std::sqrt(sq_sum / static_cast<double>(pairs.size()));

    result.iterations = iter + 1;
    result.rms = rms;
    result.rms_history.push_back(rms);
    if (prev_rms - rms < params.convergence_eps) {
      result.converged = true;
      break;
    }
    prev_rms = rms;
  }
  return result;
}

namespace {

const Skeleton& single_person(const SensorCapture& capture) {
  const auto& skeletons = capture.skeletons.skeletons;
  if (skeletons.empty()) {
    throw std::runtime_error("calibration stage 'reference person': sensor '" + capture.sensor_id +
                             "' sees nobody at the calibration instant");
  }
  if (skeletons.size() > 1) {
    throw std::runtime_error("calibration stage 'reference person': sensor '" + capture.sensor_id +
                             "' sees " + std::to_string(skeletons.size()) + " people, need exactly one");
  }
  return skeletons.front();
}

}  // namespace

PairCalibration calibrate_pair(const SensorCapture& reference, const SensorCapture& other,
                               const CalibrationParams& params) {
  const Skeleton& person_ref = single_person(reference);
  const Skeleton& person_other = single_person(other);

  PairCalibration out;
  try {
    out.initial = estimate_from_skeletons(person_ref, person_other, params.min_joint_confidence);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("calibration stage 'skeleton estimate': ") + e.what());
  }

  if (reference.depth.data.empty() || other.depth.data.empty()) {
    throw std::runtime_error("calibration stage 'point clouds': missing depth image for sensor '" +
                             (reference.depth.data.empty() ? reference.sensor_id : other.sensor_id) + "'");
  }

  // Clouds stay in their own sensor frames; each is trimmed to the
  // neighbourhood of the reference person (floor below included).
  PointCloud target = filter_radius(backproject(reference.depth), person_ref.pelvis().position,
                                    params.r_person_m);
  PointCloud source = filter_radius(backproject(other.depth), person_other.pelvis().position,
                                    params.r_person_m);
  if (target.empty() || source.empty()) {
    throw std::runtime_error("calibration stage 'point clouds': person-proximity filter left no points");
  }

  out.icp_result.transform = out.initial;
  try {
    // Coarse to fine: the first run keeps the configured correspondence
    // gate so a rough skeleton seed still finds pairs; every following
    // run quarters it, which trims the cross-surface pairs two partially
    // overlapping views otherwise trade bias through.
    IcpParams run_params = params.icp;
    for (int run = 0; run < std::max(1, params.icp_runs); ++run) {
      out.icp_result = icp(source, target, out.icp_result.transform, run_params);
      run_params.max_correspondence_dist *= 0.25;
    }
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("calibration stage 'icp': ") + e.what());
  }
  out.extrinsic = out.icp_result.transform;
  return out;
}

const RigidTransform& extrinsic_of(const CalibrationResult& c, const std::string& sensor_id) {
  for (const SensorExtrinsic& s : c.sensors) {
    if (s.sensor_id == sensor_id) return s.extrinsic;
  }
  throw std::runtime_error("calibration has no sensor '" + sensor_id + "'");
}

}  // namespace skelfuse
