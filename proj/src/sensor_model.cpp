#include "skelfuse/sensor_model.hpp"

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>

namespace skelfuse {

void validate(const Intrinsics& k) {
  if (k.width < 1 || k.height < 1) throw std::invalid_argument("intrinsics: image size must be at least 1x1");
  if (!(k.fx > 0) || !(k.fy > 0)) throw std::invalid_argument("intrinsics: focal lengths must be positive");
  if (!(k.cx >= 0 && k.cx < k.width) || !(k.cy >= 0 && k.cy < k.height)) {
    throw std::invalid_argument("intrinsics: principal point outside the image");
  }
}

Vec3 backproject_pixel(const Intrinsics& k, double u, double v, double depth_mm) {
  const double z = depth_mm / 1000.0;
  return {(u - k.cx) / k.fx * z, (v - k.cy) / k.fy * z, z};
}

PointCloud backproject(const DepthImage& img) {
  validate(img.intrinsics);
  const Intrinsics& k = img.intrinsics;
  if (img.data.size() != static_cast<size_t>(k.width) * k.height) {
    throw std::invalid_argument("depth image: data length does not match width*height");
  }
  PointCloud out;
  out.points.reserve(img.data.size());
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const uint16_t d = img.at(u, v);
      if (d == 0) continue;
      out.points.push_back(backproject_pixel(k, u, v, d));
    }
  }
  return out;
}

std::optional<PixelProjection> project(const Vec3& p, const Intrinsics& k) {
  if (!(p.z() > 0)) return std::nullopt;
  PixelProjection px;
  px.u = k.fx * p.x() / p.z() + k.cx;
  px.v = k.fy * p.y() / p.z() + k.cy;
  px.depth_mm = 1000.0 * p.z();
  if (px.u < 0 || px.u > k.width - 1 || px.v < 0 || px.v > k.height - 1) return std::nullopt;
  return px;
}

PointCloud filter_radius(const PointCloud& c, const Vec3& center, double radius_m) {
  if (!(radius_m > 0)) throw std::invalid_argument("filter_radius: radius must be positive");
  PointCloud out;
  const double r2 = radius_m * radius_m;
  for (const Vec3& p : c.points) {
    if ((p - center).squaredNorm() <= r2) out.points.push_back(p);
  }
  return out;
}

PointCloud voxel_downsample(const PointCloud& c, double cell_m) {
  if (!(cell_m > 0)) throw std::invalid_argument("voxel_downsample: cell size must be positive");
  struct Acc {
    Vec3 sum = Vec3::Zero();
    int count = 0;
  };
  std::map<std::array<int64_t, 3>, Acc> cells;
  for (const Vec3& p : c.points) {
    const std::array<int64_t, 3> key = {static_cast<int64_t>(std::floor(p.x() / cell_m)),
                                        static_cast<int64_t>(std::floor(p.y() / cell_m)),
                                        static_cast<int64_t>(std::floor(p.z() / cell_m))};
    auto& acc = cells[key];
    acc.sum += p;
    acc.count += 1;
  }
  PointCloud out;
  out.points.reserve(cells.size());
  for (const auto& [key, acc] : cells) out.points.push_back(acc.sum / acc.count);
  return out;
}

PointCloud transform_cloud(const RigidTransform& t, const PointCloud& c) {
  PointCloud out;
  out.points.reserve(c.points.size());
  for (const Vec3& p : c.points) out.points.push_back(t.apply(p));
  return out;
}

}  // namespace skelfuse
