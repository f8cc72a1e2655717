#pragma once

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

#include "skelfuse/geometry.hpp"

namespace skelfuse {

// Static 3D kd-tree for nearest-neighbor queries. Median split on
// axis = depth % 3 over an index array; the point set is copied.
class KdTree3 {
 public:
  explicit KdTree3(std::vector<Vec3> points) : pts_(std::move(points)), index_(pts_.size()) {
    for (size_t i = 0; i < index_.size(); ++i) index_[i] = static_cast<int>(i);
    if (!pts_.empty()) build(0, static_cast<int>(pts_.size()), 0);
  }

  bool empty() const { return pts_.empty(); }
  const Vec3& point(int i) const { return pts_[i]; }

  // (index, squared distance) of the nearest stored point.
  std::pair<int, double> nearest(const Vec3& q) const {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    search(q, 0, static_cast<int>(pts_.size()), 0, best, best_d2);
    return {best, best_d2};
  }

 private:
  void build(int lo, int hi, int depth) {
    if (hi - lo <= 1) return;
    const int mid = (lo + hi) / 2;
    const int axis = depth % 3;
    std::nth_element(index_.begin() + lo, index_.begin() + mid, index_.begin() + hi,
                     [&](int a, int b) { return pts_[a][axis] < pts_[b][axis]; });
    build(lo, mid, depth + 1);
    build(mid + 1, hi, depth + 1);
  }

  void search(const Vec3& q, int lo, int hi, int depth, int& best, double& best_d2) const {
    if (lo >= hi) return;
    const int mid = (lo + hi) / 2;
    const int idx = index_[mid];
    const double d2 = (pts_[idx] - q).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = idx;
    }
    const int axis = depth % 3;
    const double delta = q[axis] - pts_[idx][axis];
    const int near_lo = delta < 0 ? lo : mid + 1;
    const int near_hi = delta < 0 ? mid : hi;
    const int far_lo = delta < 0 ? mid + 1 : lo;
    const int far_hi = delta < 0 ? hi : mid;
    search(q, near_lo, near_hi, depth + 1, best, best_d2);
    if (delta * delta < best_d2) search(q, far_lo, far_hi, depth + 1, best, best_d2);
  }

  std::vector<Vec3> pts_;
  std::vector<int> index_;
};

}  // namespace skelfuse
