#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace skelfuse {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

// Orthonormality / unit-determinant tolerance for rotation matrices.
inline constexpr double kRotationTol = 1e-9;

bool is_rotation(const Mat3& m, double tol = kRotationTol);

// Throws std::invalid_argument when m is not a rotation within tol.
void check_rotation(const Mat3& m, double tol = kRotationTol);

// Rotation of `angle_rad` about `axis` (need not be unit length).
Mat3 rotation_about(const Vec3& axis, double angle_rad);

inline Mat3 rotation_z(double angle_rad) { return rotation_about(Vec3(0, 0, 1), angle_rad); }

// Angle of a rotation matrix, in [0, pi].
double rotation_angle(const Mat3& r);

// Angle between two rotations, i.e. angle of a^T * b.
double rotation_distance(const Mat3& a, const Mat3& b);

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

// Chordal L2 mean: the input matrices are accumulated in order, the
// arithmetic mean is projected onto SO(3) via SVD with determinant sign
// correction. Throws std::invalid_argument on an empty list and
// std::runtime_error when the mean matrix is rank deficient (e.g. when
// averaging antipodal rotations), so a reflection is never returned.
Mat3 average_rotations(const std::vector<Mat3>& rotations);

// Component-wise arithmetic mean, accumulated in input order.
Vec3 average_translations(const std::vector<Vec3>& translations);

// Rigid transform minimizing sum |T*src - dst|^2 over all (src, dst)
// pairs (Kabsch). Requires >= 3 non-collinear pairs; throws
// std::runtime_error on degenerate configurations.
RigidTransform align_least_squares(const std::vector<std::pair<Vec3, Vec3>>& pairs);

// Right-handed orthonormal joint orientation basis.
struct AxisTriad {
  Vec3 x = Vec3::UnitX();
  Vec3 y = Vec3::UnitY();
  Vec3 z = Vec3::UnitZ();
};

// Gram-Schmidt in order: x normalized, then y minus its x component,
// then z := x cross y. The input z only matters in that it is replaced.
// Throws std::runtime_error when x is (near) zero or x and y are (near)
// parallel.
AxisTriad orthonormalize(const Vec3& x, const Vec3& y, const Vec3& z);

inline AxisTriad orthonormalize(const AxisTriad& t) { return orthonormalize(t.x, t.y, t.z); }

// Columns of the rotation are the triad axes.
Mat3 triad_to_rotation(const AxisTriad& t);
AxisTriad rotation_to_triad(const Mat3& r);

}  // namespace skelfuse
