#include "skelfuse/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace skelfuse {

bool is_rotation(const Mat3& m, double tol) {
  const Mat3 err = m.transpose() * m - Mat3::Identity();
  if (err.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(m.determinant() - 1.0) <= tol;
}

void check_rotation(const Mat3& m, double tol) {
  if (!is_rotation(m, tol)) {
    throw std::invalid_argument("matrix is not a rotation (orthonormal, det +1)");
  }
}

Mat3 rotation_about(const Vec3& axis, double angle_rad) {
  return Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
}

double rotation_angle(const Mat3& r) {
  // atan2 form; the plain acos of the trace loses precision near 0.
  const Vec3 axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = 0.5 * axis.norm();
  const double c = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::atan2(s, c);
}

double rotation_distance(const Mat3& a, const Mat3& b) {
  return rotation_angle(Mat3(a.transpose() * b));
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

RigidTransform invert(const RigidTransform& t) {
  const Mat3 rt = t.rotation.transpose();
  return {rt, -(rt * t.translation)};
}

namespace {

// Nearest element of SO(3) in the Frobenius sense, with the determinant
// sign fixed on the weakest singular direction. Throws when the smallest
// singular value is below `rank_tol` (projection not well defined).
Mat3 project_to_so3(const Mat3& m, double rank_tol, const char* what) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) < rank_tol) {
    throw std::runtime_error(std::string(what) + ": matrix is rank deficient, no unique SO(3) projection");
  }
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

}  // namespace

Mat3 average_rotations(const std::vector<Mat3>& rotations) {
  if (rotations.empty()) throw std::invalid_argument("average_rotations: empty input");
  Mat3 sum = Mat3::Zero();
  for (const Mat3& r : rotations) sum += r;
  return project_to_so3(sum / static_cast<double>(rotations.size()), 1e-9, "average_rotations");
}

Vec3 average_translations(const std::vector<Vec3>& translations) {
  if (translations.empty()) throw std::invalid_argument("average_translations: empty input");
  Vec3 sum = Vec3::Zero();
  for (const Vec3& t : translations) sum += t;
  return sum / static_cast<double>(translations.size());
}

RigidTransform align_least_squares(const std::vector<std::pair<Vec3, Vec3>>& pairs) {
  if (pairs.size() < 3) {
    throw std::runtime_error("align_least_squares: need at least 3 point pairs");
  }
  const double n = static_cast<double>(pairs.size());
  Vec3 src_mean = Vec3::Zero();
  Vec3 dst_mean = Vec3::Zero();
  for (const auto& [s, d] : pairs) {
    src_mean += s;
    dst_mean += d;
  }
  src_mean /= n;
  dst_mean /= n;

  Mat3 cov = Mat3::Zero();  // sum of src_c * dst_c^T
  for (const auto& [s, d] : pairs) {
    cov += (s - src_mean) * (d - dst_mean).transpose();
  }

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // Collinear or coincident points leave the rotation underdetermined.
  if (sv(0) <= 0.0 || sv(1) < 1e-9 * sv(0)) {
    throw std::runtime_error("align_least_squares: degenerate (collinear or coincident) point configuration");
  }
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  const Mat3 r = svd.matrixV() * d * svd.matrixU().transpose();
  return {r, dst_mean - r * src_mean};
}

AxisTriad orthonormalize(const Vec3& x, const Vec3& y, const Vec3& /*z*/) {
  const double xn = x.norm();
  if (xn < 1e-12) throw std::runtime_error("orthonormalize: x axis is zero");
  const Vec3 xu = x / xn;
  const Vec3 y_perp = y - xu.dot(y) * xu;
  const double yn = y_perp.norm();
  if (yn < 1e-12 * std::max(1.0, y.norm())) {
    throw std::runtime_error("orthonormalize: x and y axes are parallel");
  }
  const Vec3 yu = y_perp / yn;
  return {xu, yu, xu.cross(yu)};
}

Mat3 triad_to_rotation(const AxisTriad& t) {
  Mat3 r;
  r.col(0) = t.x;
  r.col(1) = t.y;
  r.col(2) = t.z;
  return r;
}

AxisTriad rotation_to_triad(const Mat3& r) {
  return {r.col(0), r.col(1), r.col(2)};
}

}  // namespace skelfuse
