#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

#include "skelfuse/geometry.hpp"

namespace skelfuse {

// Small deterministic generator (splitmix64). Used instead of <random>
// so that streams can be split per (sensor, frame, body, joint) and the
// produced sessions are byte-identical across platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Box-Muller; draws two uniforms per sample.
  double normal(double sigma = 1.0) {
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vec3 normal_vec3(double sigma) {
    const double x = normal(sigma);
    const double y = normal(sigma);
    const double z = normal(sigma);
    return {x, y, z};
  }

  Vec3 unit_vec3() {
    while (true) {
      const Vec3 v = normal_vec3(1.0);
      const double n = v.norm();
      if (n > 1e-12) return v / n;
    }
  }

  Mat3 random_rotation(double max_angle_rad) {
    return rotation_about(unit_vec3(), uniform(-max_angle_rad, max_angle_rad));
  }

  // Deterministic sub-stream derivation.
  static uint64_t mix(std::initializer_list<uint64_t> parts) {
    uint64_t h = 0x2545f4914f6cdd1dULL;
    for (uint64_t p : parts) {
      h ^= p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      Rng r(h);
      h = r.next_u64();
    }
    return h;
  }

 private:
  uint64_t state_;
};

}  // namespace skelfuse
