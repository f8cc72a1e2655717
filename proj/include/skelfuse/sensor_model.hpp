#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "skelfuse/geometry.hpp"

namespace skelfuse {

// Ideal pinhole model, no distortion. Sensor frame: +Z along the optical
// axis, +X right, +Y down. Pixel centers sit at integer (u, v).
struct Intrinsics {
  int width = 0;
  int height = 0;
  double fx = 0;
  double fy = 0;
  double cx = 0;
  double cy = 0;
};

// Throws std::invalid_argument when the intrinsics are unusable.
void validate(const Intrinsics& k);

// Depth in integer millimeters, 0 = invalid, row-major.
struct DepthImage {
  Intrinsics intrinsics;
  std::vector<uint16_t> data;

  uint16_t at(int u, int v) const { return data[static_cast<size_t>(v) * intrinsics.width + u]; }
};

struct PointCloud {
  std::vector<Vec3> points;

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// One pixel back-projected at real-valued coordinates.
Vec3 backproject_pixel(const Intrinsics& k, double u, double v, double depth_mm);

// Back-projects every valid pixel, row-major scan order.
PointCloud backproject(const DepthImage& img);

struct PixelProjection {
  double u = 0;
  double v = 0;
  double depth_mm = 0;
};

// nullopt when the point is behind the camera or projects outside the
// pixel grid [0, width-1] x [0, height-1].
std::optional<PixelProjection> project(const Vec3& p, const Intrinsics& k);

// Points within `radius_m` of `center` (inclusive), input order kept.
PointCloud filter_radius(const PointCloud& c, const Vec3& center, double radius_m);

// One centroid per occupied cell, output sorted by cell index.
PointCloud voxel_downsample(const PointCloud& c, double cell_m);

PointCloud transform_cloud(const RigidTransform& t, const PointCloud& c);

}  // namespace skelfuse
