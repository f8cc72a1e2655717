#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skelfuse/sensor_model.hpp"
#include "skelfuse/skeleton.hpp"

namespace skelfuse {

struct IcpParams {
  int max_iterations = 50;
  double convergence_eps = 1e-5;        // meters, RMS improvement
  double max_correspondence_dist = 0.2; // meters, 0 disables rejection
  double downsample_cell = 0.02;        // meters, 0 disables downsampling
};

void validate(const IcpParams& p);

struct IcpResult {
  RigidTransform transform;  // source frame -> target frame
  double rms = 0;            // over surviving pairs, final transform
  int iterations = 0;
  bool converged = false;
  std::vector<double> rms_history;  // one entry per iteration
};

struct CalibrationParams {
  IcpParams icp;
  int icp_runs = 2;                  // ICP restarts from the previous result
  double r_person_m = 2.0;           // person-proximity cloud filter radius
  Confidence min_joint_confidence = Confidence::Medium;
};

// Per-joint rigid transforms between two views of one person, averaged
// into a single sensor-B -> sensor-A estimate. Joints qualify when both
// sides report at least `min_conf`. Throws std::runtime_error with
// fewer than 3 qualifying joints.
RigidTransform estimate_from_skeletons(const Skeleton& sa, const Skeleton& sb, Confidence min_conf);

// Point-to-point ICP with kd-tree correspondences and least-squares
// alignment. Throws std::runtime_error when a cloud is empty after the
// optional downsampling or when an iteration rejects every
// correspondence.
IcpResult icp(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
              const IcpParams& params);

// One sensor's recording at the calibration instant.
struct SensorCapture {
  std::string sensor_id;
  SkeletonFrame skeletons;  // interpolated to the shared instant, sensor frame
  DepthImage depth;
};

struct PairCalibration {
  RigidTransform extrinsic;       // other-sensor frame -> reference frame
  RigidTransform initial;         // skeleton-based starting point
  IcpResult icp_result;           // final ICP run
};

// Full pairwise calibration: skeleton-seeded initial estimate, person-
// proximity cloud filtering, then repeated ICP refinement. Throws
// std::runtime_error naming the failed stage.
PairCalibration calibrate_pair(const SensorCapture& reference, const SensorCapture& other,
                               const CalibrationParams& params);

struct SensorExtrinsic {
  std::string sensor_id;
  RigidTransform extrinsic;  // sensor frame -> world frame
};

struct SensorDiagnostics {
  std::string sensor_id;
  RigidTransform initial;
  double icp_rms = 0;
  int icp_iterations = 0;
  bool icp_converged = false;
};

struct CalibrationResult {
  std::string reference_sensor_id;
  std::vector<SensorExtrinsic> sensors;  // reference included, identity
  std::vector<SensorDiagnostics> diagnostics;
};

const RigidTransform& extrinsic_of(const CalibrationResult& c, const std::string& sensor_id);

}  // namespace skelfuse
