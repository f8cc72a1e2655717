// Acceptance suite: one line per criterion, pinned tolerances, nonzero
// exit when anything fails. Run through ctest as 'acceptance' or invoke
// the binary directly.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skelfuse/calibration.hpp"
#include "skelfuse/io.hpp"
#include "skelfuse/matching.hpp"
#include "skelfuse/merging.hpp"
#include "skelfuse/pipeline.hpp"
#include "skelfuse/rng.hpp"
#include "skelfuse/simulator.hpp"

using namespace skelfuse;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double deg = kPi / 180.0;

struct Tally {
  int checks = 0;
  int failures = 0;
  std::string first_failure;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok) {
      ++failures;
      if (first_failure.empty()) first_failure = what;
    }
  }
};

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

RigidTransform look_along_y(const Vec3& position) {
  Mat3 r;
  r.col(0) = Vec3(1, 0, 0);
  r.col(1) = Vec3(0, 0, -1);
  r.col(2) = Vec3(0, 1, 0);
  return {r, position};
}

RigidTransform look_along_y_yawed(const Vec3& position, double yaw) {
  RigidTransform t = look_along_y(position);
  t.rotation = rotation_z(yaw) * t.rotation;
  return t;
}

Intrinsics default_intrinsics() { return {320, 288, 208.5, 208.5, 160.0, 144.0}; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path work_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("skelfuse_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// ---------------------------------------------------------------- 1 ---

bool criterion_geometry(std::string& detail) {
  Tally t;
  Rng rng(1001);
  for (int k = 0; k < 1000; ++k) {
    const RigidTransform tr{rng.random_rotation(kPi), rng.normal_vec3(2.0)};
    const Vec3 p = rng.normal_vec3(3.0);
    t.expect((invert(tr).apply(tr.apply(p)) - p).norm() < 1e-9, "transform round trip");
  }
  for (int k = 0; k < 1000; ++k) {
    const Mat3 r = rng.random_rotation(kPi);
    t.expect((average_rotations({r, r, r}) - r).cwiseAbs().maxCoeff() < 1e-9, "average idempotence");
    const Vec3 axis = rng.unit_vec3();
    const double a = rng.uniform(0.0, 80 * deg);
    const Mat3 avg = average_rotations({rotation_about(axis, a), rotation_about(axis, -a)});
    t.expect((avg - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9, "average symmetry");
  }
  for (int k = 0; k < 1000; ++k) {
    const RigidTransform truth{rng.random_rotation(kPi), rng.normal_vec3(2.0)};
    std::vector<std::pair<Vec3, Vec3>> pairs;
    pairs.emplace_back(Vec3(1, 0, 0), Vec3());
    pairs.emplace_back(Vec3(0, 1, 0), Vec3());
    pairs.emplace_back(Vec3(0, 0, 1), Vec3());
    const int extra = 1 + static_cast<int>(rng.next_u64() % 17);
    for (int i = 0; i < extra; ++i) pairs.emplace_back(rng.normal_vec3(1.0), Vec3());
    for (auto& [s, d] : pairs) d = truth.apply(s);
    const RigidTransform est = align_least_squares(pairs);
    t.expect(rotation_distance(est.rotation, truth.rotation) < 1e-9 &&
                 (est.translation - truth.translation).norm() < 1e-9,
             "alignment exact recovery");
  }
  detail = format("%d randomized checks, %d failed%s%s", t.checks, t.failures,
                  t.failures ? ": " : "", t.first_failure.c_str());
  return t.failures == 0;
}

// ---------------------------------------------------------------- 2 ---

bool criterion_backprojection(std::string& detail) {
  Tally t;
  const Intrinsics k = default_intrinsics();
  Rng rng(1002);
  double worst = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform(0.0, k.width - 1.0);
    const double v = rng.uniform(0.0, k.height - 1.0);
    const double z = rng.uniform(0.5, 2.0);
    const Vec3 p = backproject_pixel(k, u, v, 1000.0 * z);
    const auto px = project(p, k);
    t.expect(px.has_value(), "constructed point projects in view");
    if (!px) continue;
    const Vec3 q = backproject_pixel(k, px->u, px->v, std::round(px->depth_mm));
    const double err = (q - p).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
    t.expect(err < 0.002, "round trip within 2 mm per axis");
  }
  detail = format("100000 points, worst per-axis error %.3f mm, %d failed", worst * 1000, t.failures);
  return t.failures == 0;
}

// ---------------------------------------------------------------- 3 ---

PointCloud icp_scene_cloud() {
  // Floor patch, box faces and person capsules, area-sampled. Surface
  // sampling keeps the cloud free of grid artifacts that would give the
  // alignment a spurious lattice symmetry.
  Rng rng(0xc10cd);
  PointCloud c;
  for (int i = 0; i < 2600; ++i) {
    const double r = 2.2 * std::sqrt(rng.next_double());
    const double a = rng.uniform(0, 2 * kPi);
    c.points.emplace_back(r * std::cos(a), 0.2 + r * std::sin(a), 0.0);
  }
  const AabbBox box{Vec3(-0.9, -0.1, 0), Vec3(-0.3, 0.5, 0.9)};
  const Vec3 ext = box.max - box.min;
  const double face_areas[6] = {ext.y() * ext.z(), ext.y() * ext.z(), ext.x() * ext.z(),
                                ext.x() * ext.z(), ext.x() * ext.y(), ext.x() * ext.y()};
  double total_area = 0;
  for (double a : face_areas) total_area += a;
  for (int i = 0; i < 1200; ++i) {
    double pick = rng.uniform(0, total_area);
    int face = 0;
    while (face < 5 && pick > face_areas[face]) pick -= face_areas[face], ++face;
    Vec3 p(rng.uniform(box.min.x(), box.max.x()), rng.uniform(box.min.y(), box.max.y()),
           rng.uniform(box.min.z(), box.max.z()));
    if (face == 0) p.x() = box.min.x();
    if (face == 1) p.x() = box.max.x();
    if (face == 2) p.y() = box.min.y();
    if (face == 3) p.y() = box.max.y();
    if (face == 4) p.z() = box.min.z();
    if (face == 5) p.z() = box.max.z();
    c.points.push_back(p);
  }
  BodyModel body;
  body.waypoints = {{0, Vec3(0.4, 0.3, 0.95), -kPi / 2}};
  const auto capsules = body_capsules(body, 0);
  for (int i = 0; i < 1200; ++i) {
    const Capsule& cap = capsules[rng.next_u64() % capsules.size()];
    const Vec3 axis = cap.p1 - cap.p0;
    const Vec3 dir = rng.unit_vec3();
    // Point on the offset surface of a random spine point.
    const Vec3 spine = cap.p0 + rng.next_double() * axis;
    c.points.push_back(spine + cap.radius * dir);
  }
  return c;
}

bool criterion_icp(std::string& detail) {
  const PointCloud target = icp_scene_cloud();
  if (target.size() < 3000 || target.size() > 8000) {
    detail = format("scene cloud has %zu points, expected about 5k", target.size());
    return false;
  }
  Rng rng(1003);
  int good = 0;
  bool monotone = true;
  IcpParams params;
  params.max_correspondence_dist = 0;  // rejection disabled, monotone objective
  params.downsample_cell = 0;          // cloud is pre-downsampled
  params.convergence_eps = 1e-6;
  params.max_iterations = 60;
  for (int trial = 0; trial < 100; ++trial) {
    const RigidTransform truth{rng.random_rotation(30 * deg), rng.unit_vec3() * rng.uniform(0.0, 1.0)};
    PointCloud source = transform_cloud(invert(truth), target);
    for (Vec3& p : source.points) p += rng.normal_vec3(0.005);
    RigidTransform init = truth;
    init.rotation = rng.random_rotation(10 * deg) * init.rotation;
    init.translation += rng.unit_vec3() * rng.uniform(0.0, 0.2);

    const IcpResult r = icp(source, target, init, params);
    for (size_t i = 1; i < r.rms_history.size(); ++i) {
      monotone = monotone && r.rms_history[i] <= r.rms_history[i - 1] + 1e-12;
    }
    if (rotation_distance(r.transform.rotation, truth.rotation) < 1 * deg &&
        (r.transform.translation - truth.translation).norm() < 0.02) {
      ++good;
    }
  }
  detail = format("%zu-point cloud, %d/100 trials within 1 deg / 2 cm, rms monotone: %s",
                  target.size(), good, monotone ? "yes" : "NO");
  return good >= 95 && monotone;
}

// ---------------------------------------------------------------- 4 ---

Scene calibration_scene(uint64_t seed) {
  Rng rng(Rng::mix({seed, 0xca11b7a7e5ull}));
  Scene s;
  s.floor = true;
  const Intrinsics k = default_intrinsics();

  auto jitter3 = [&](double xy, double z) {
    return Vec3(rng.uniform(-xy, xy), rng.uniform(-xy, xy), rng.uniform(-z, z));
  };

  const RigidTransform cam0 =
      look_along_y_yawed(Vec3(-0.9, -2.7, 1.5) + jitter3(0.15, 0.08), rng.uniform(-0.1, 0.1));
  const RigidTransform cam1 = look_along_y_yawed(Vec3(1.1, -2.6, 1.45) + jitter3(0.15, 0.08),
                                                 0.35 + rng.uniform(-0.1, 0.1));
  s.sensors.push_back({"cam0", k, cam0, 0, 5.0});
  s.sensors.push_back({"cam1", k, cam1, 11111, 5.0});

  // Standing-desk and cardboard-box stand-ins, about 2.5-3 m from the
  // sensors, with the reference person between them.
  const Vec3 desk_shift(rng.uniform(-0.12, 0.12), rng.uniform(-0.08, 0.2), 0);
  s.boxes.push_back({Vec3(-1.0, 0.1, 0.0) + desk_shift,
                     Vec3(-0.45, 0.65, 0.9 + rng.uniform(-0.1, 0.1)) + desk_shift});
  const Vec3 box_shift(rng.uniform(-0.12, 0.12), rng.uniform(-0.08, 0.2), 0);
  s.boxes.push_back({Vec3(0.55, 0.15, 0.0) + box_shift, Vec3(1.05, 0.6, 0.5) + box_shift});

  BodyModel person;
  person.waypoints = {{0, Vec3(rng.uniform(-0.25, 0.25), 0.35 + rng.uniform(-0.15, 0.25), 0.95),
                       -kPi / 2 + rng.uniform(-0.5, 0.5)}};
  s.bodies.push_back(person);

  s.noise.joint_pos_sigma_m = 0.02;
  s.noise.axis_sigma_rad = 2 * deg;
  s.noise.depth_sigma_mm = 2.0;
  s.noise.seed = seed;
  s.duration_s = 0.2;
  s.fps = 30.0;
  s.calibration_times_us = {0};
  return s;
}

bool criterion_calibration(std::string& detail) {
  const PipelineConfig config = load_config(std::nullopt);
  const fs::path dir = work_dir("calibration");
  int good_initial = 0;
  int good_final = 0;
  int good_both = 0;
  int errors = 0;
  double worst_rot = 0, worst_tr = 0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    const Scene scene = calibration_scene(seed);
    const fs::path session = dir / ("scene_" + std::to_string(seed));
    try {
      generate_session(scene, session);
      const CalibrationResult result = cmd_calibrate(session, config, session / "calibration.json");
      const RigidTransform truth =
          compose(invert(scene.sensors[0].extrinsic), scene.sensors[1].extrinsic);
      const RigidTransform& initial = result.diagnostics.at(0).initial;
      const RigidTransform& final_t = extrinsic_of(result, "cam1");
      const bool init_ok = rotation_distance(initial.rotation, truth.rotation) < 10 * deg &&
                           (initial.translation - truth.translation).norm() < 0.10;
      const double rot_err = rotation_distance(final_t.rotation, truth.rotation);
      const double tr_err = (final_t.translation - truth.translation).norm();
      worst_rot = std::max(worst_rot, rot_err);
      worst_tr = std::max(worst_tr, tr_err);
      const bool final_ok = rot_err < 2 * deg && tr_err < 0.05;
      good_initial += init_ok;
      good_final += final_ok;
      good_both += init_ok && final_ok;
    } catch (const std::exception&) {
      ++errors;
    }
    fs::remove_all(session);
  }
  fs::remove_all(dir);
  detail = format(
      "initial within 10 deg/10 cm: %d/100, refined within 2 deg/5 cm: %d/100, both: %d/100, "
      "errors: %d, worst refined %.2f deg / %.1f mm",
      good_initial, good_final, good_both, errors, worst_rot / deg, worst_tr * 1000);
  return good_both >= 95;
}

// ---------------------------------------------------------------- 5 ---

Skeleton pelvis_only(int body_id, const Vec3& pos) {
  Skeleton s;
  s.body_id = body_id;
  Joint j;
  j.id = JointId::Pelvis;
  j.position = pos;
  j.confidence = Confidence::High;
  s.joints = {j};
  return s;
}

struct BruteForce {
  std::vector<std::pair<int, int>> pairs;
  bool unique = true;
};

BruteForce brute_force_bottleneck(const std::vector<Skeleton>& a, const std::vector<Skeleton>& b,
                                  double d_max) {
  std::vector<std::vector<double>> dist(a.size(), std::vector<double>(b.size()));
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = 0; j < b.size(); ++j) {
      dist[i][j] = (a[i].pelvis().position - b[j].pelvis().position).norm();
    }
  }
  BruteForce best;
  size_t best_card = 0;
  double best_bottleneck = 0;
  bool have = false;
  std::vector<std::pair<int, int>> cur;
  std::vector<bool> used(b.size(), false);
  std::function<void(size_t)> rec = [&](size_t i) {
    if (i == a.size()) {
      double bn = 0;
      for (const auto& [x, y] : cur) bn = std::max(bn, dist[x][y]);
      if (!have || cur.size() > best_card || (cur.size() == best_card && bn < best_bottleneck)) {
        best.pairs = cur;
        best_card = cur.size();
        best_bottleneck = bn;
        best.unique = true;
        have = true;
      } else if (cur.size() == best_card && bn == best_bottleneck) {
        auto sc = cur, sb = best.pairs;
        std::sort(sc.begin(), sc.end());
        std::sort(sb.begin(), sb.end());
        if (sc != sb) best.unique = false;
      }
      return;
    }
    rec(i + 1);
    for (size_t j = 0; j < b.size(); ++j) {
      if (used[j] || dist[i][j] > d_max) continue;
      used[j] = true;
      cur.emplace_back(static_cast<int>(i), static_cast<int>(j));
      rec(i + 1);
      cur.pop_back();
      used[j] = false;
    }
  };
  rec(0);
  return best;
}

std::vector<std::pair<int, int>> id_pairs(const MatchOutcome& o) {
  std::vector<std::pair<int, int>> v;
  for (const MatchedPair& p : o.pairs) v.emplace_back(p.a.body_id, p.b.body_id);
  std::sort(v.begin(), v.end());
  return v;
}

bool criterion_matching(std::string& detail) {
  Tally t;
  const MatchConfig cfg;
  Rng rng(1005);

  // Simulated frames: 2-6 persons at >= 1 m spacing, 5 cm pelvis noise.
  int correct_frames = 0;
  for (int frame = 0; frame < 1000; ++frame) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 5);
    std::vector<Vec3> truth;
    while (static_cast<int>(truth.size()) < n) {
      const Vec3 candidate(rng.uniform(-3, 3), rng.uniform(-3, 3), 0.95);
      bool ok = true;
      for (const Vec3& q : truth) ok = ok && (candidate - q).norm() >= 1.0;
      if (ok) truth.push_back(candidate);
    }
    std::vector<Skeleton> a, b;
    for (int i = 0; i < n; ++i) {
      a.push_back(pelvis_only(100 + i, truth[i] + rng.normal_vec3(0.05)));
      b.push_back(pelvis_only(200 + i, truth[i] + rng.normal_vec3(0.05)));
    }
    const MatchOutcome out = match_skeletons(a, b, cfg, {});
    std::vector<std::pair<int, int>> expected;
    for (int i = 0; i < n; ++i) expected.emplace_back(100 + i, 200 + i);
    if (id_pairs(out) == expected) ++correct_frames;
  }
  t.expect(correct_frames == 1000, format("correspondence accuracy %d/1000", correct_frames));

  // Partition / symmetry / determinism on adversarial clustered scenes.
  int invariant_failures = 0;
  for (int k = 0; k < 10000; ++k) {
    const int na = static_cast<int>(rng.next_u64() % 7);
    const int nb = static_cast<int>(rng.next_u64() % 7);
    std::vector<Skeleton> a, b;
    for (int i = 0; i < na; ++i) a.push_back(pelvis_only(i, rng.normal_vec3(0.5)));
    for (int j = 0; j < nb; ++j) {
      // Duplicated coordinates create exact distance ties.
      if (j > 0 && rng.next_double() < 0.25) {
        b.push_back(pelvis_only(j, b[j - 1].pelvis().position));
      } else {
        b.push_back(pelvis_only(j, rng.normal_vec3(0.5)));
      }
    }
    MatchHistory hist;
    if (na && nb && rng.next_double() < 0.3) {
      hist.pairs.insert({static_cast<int>(rng.next_u64() % na), static_cast<int>(rng.next_u64() % nb)});
    }
    const MatchOutcome out = match_skeletons(a, b, cfg, hist);
    bool ok = out.pairs.size() * 2 + out.isolated_a.size() + out.isolated_b.size() ==
              static_cast<size_t>(na + nb);
    for (const MatchedPair& p : out.pairs) ok = ok && p.distance <= cfg.d_max;
    ok = ok && id_pairs(match_skeletons(a, b, cfg, hist)) == id_pairs(out);
    MatchHistory hist_t;
    for (const auto& [x, y] : hist.pairs) hist_t.pairs.insert({y, x});
    const MatchOutcome swapped = match_skeletons(b, a, cfg, hist_t);
    std::vector<std::pair<int, int>> sw;
    for (const MatchedPair& p : swapped.pairs) sw.emplace_back(p.b.body_id, p.a.body_id);
    std::sort(sw.begin(), sw.end());
    ok = ok && sw == id_pairs(out);
    if (!ok) ++invariant_failures;
  }
  t.expect(invariant_failures == 0,
           format("%d of 10000 adversarial scenes broke an invariant", invariant_failures));

  // Greedy equals the brute-force bottleneck optimum on unambiguous
  // instances up to 6x6.
  int compared = 0, agree = 0;
  while (compared < 300) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 5);
    std::vector<Skeleton> a, b;
    for (int i = 0; i < n; ++i) {
      const Vec3 base(1.7 * i, 1.7 * static_cast<double>(rng.next_u64() % 4), 0);
      a.push_back(pelvis_only(i, base + rng.normal_vec3(0.06)));
      if (rng.next_double() < 0.85) b.push_back(pelvis_only(i, base + rng.normal_vec3(0.06)));
    }
    const BruteForce brute = brute_force_bottleneck(a, b, cfg.d_max);
    if (!brute.unique) continue;
    ++compared;
    std::vector<std::pair<int, int>> expected;
    for (const auto& [i, j] : brute.pairs) expected.emplace_back(a[i].body_id, b[j].body_id);
    std::sort(expected.begin(), expected.end());
    if (id_pairs(match_skeletons(a, b, cfg, {})) == expected) ++agree;
  }
  t.expect(agree == compared, format("greedy matched brute force on %d/%d instances", agree, compared));

  detail = format("accuracy %d/1000, invariants %d/10000 bad, bottleneck %d/%d", correct_frames,
                  invariant_failures, agree, compared);
  return t.failures == 0;
}

// ---------------------------------------------------------------- 6 ---

bool criterion_merging(std::string& detail) {
  Tally t;

  // Weight table and the worked merge example, exact.
  t.expect(weight_of(Confidence::None) == 0.0, "weight none");
  t.expect(weight_of(Confidence::Low) == 0.25, "weight low");
  t.expect(weight_of(Confidence::Medium) == 0.5, "weight medium");
  t.expect(weight_of(Confidence::High) == 1.0, "weight high");

  auto joint_at = [](const Vec3& p, Confidence c) {
    Joint j;
    j.id = JointId::Neck;
    j.position = p;
    j.confidence = c;
    return j;
  };
  const Joint med = joint_at(Vec3(0, 0, 0), Confidence::Medium);
  const Joint low = joint_at(Vec3(0.3, 0, 0), Confidence::Low);
  t.expect(std::abs(merge_joint(med, low).position.x() - 0.1) < 1e-12, "weighted merge hand check");
  t.expect(merge_joint(med, joint_at(Vec3(1, 0, 0), Confidence::Medium)).position == Vec3(0.5, 0, 0),
           "symmetric midpoint");
  const Joint none = joint_at(Vec3(9, 9, 9), Confidence::None);
  t.expect(merge_joint(med, none).position == med.position, "zero weight passthrough");

  Rng rng(1006);
  auto random_joint = [&rng]() {
    Joint j;
    j.id = JointId::Neck;
    j.position = rng.normal_vec3(1.0);
    j.axes = rotation_to_triad(rng.random_rotation(3.0));
    j.confidence = static_cast<Confidence>(rng.next_u64() % 4);
    return j;
  };
  int bad = 0;
  for (int k = 0; k < 100000; ++k) {
    const Joint i = random_joint();
    const Joint j = random_joint();
    const Joint m = merge_joint(i, j);
    const Joint m2 = merge_joint(j, i);
    bool ok = (m.position - m2.position).norm() < 1e-12;
    const double via = (m.position - i.position).norm() + (m.position - j.position).norm();
    ok = ok && std::abs(via - (i.position - j.position).norm()) < 1e-9;
    ok = ok && is_rotation(triad_to_rotation(m.axes), 1e-6);
    if (!ok) ++bad;
  }
  t.expect(bad == 0, format("%d of 100000 random joint merges broke an invariant", bad));

  // sigma / sqrt(2) error reduction under symmetric equal-weight noise.
  const double sigma = 0.04;
  double sq = 0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const Vec3 truth = rng.normal_vec3(1.0);
    const Joint i = joint_at(truth + rng.normal_vec3(sigma), Confidence::Medium);
    const Joint j = joint_at(truth + rng.normal_vec3(sigma), Confidence::Medium);
    sq += (merge_joint(i, j).position - truth).squaredNorm();
  }
  const double rms_axis = std::sqrt(sq / (3.0 * n));
  const double expected = sigma / std::sqrt(2.0);
  t.expect(std::abs(rms_axis - expected) / expected < 0.10,
           format("rms %.5f vs sigma/sqrt2 %.5f", rms_axis, expected));

  detail = format("%d checks, %d failed; noise reduction %.4f vs %.4f expected", t.checks, t.failures,
                  rms_axis, expected);
  return t.failures == 0;
}

// ---------------------------------------------------------------- 7 ---

bool criterion_occlusion(std::string& detail) {
  // One walking person; a prop hides them from cam0 for roughly half the
  // walk and another hides them from cam1 early on. Full occlusion of
  // the pelvis drops the body from that sensor's stream.
  Scene s;
  s.floor = true;
  const Intrinsics k = default_intrinsics();
  s.sensors.push_back({"cam0", k, look_along_y(Vec3(-0.9, -2.7, 1.5)), 0, 5.0});
  s.sensors.push_back({"cam1", k, look_along_y_yawed(Vec3(1.1, -2.6, 1.45), 0.2), 11111, 5.0});
  s.boxes.push_back({Vec3(-0.65, -1.6, 0.0), Vec3(-0.45, -1.4, 2.0)});  // blocks cam0 mid-walk
  s.boxes.push_back({Vec3(0.55, -1.6, 0.0), Vec3(0.72, -1.4, 2.0)});    // blocks cam1 early
  BodyModel walker;
  walker.waypoints = {{0, Vec3(-0.8, 1.6, 0.95), 0}, {10000000, Vec3(1.2, 1.6, 0.95), 0}};
  s.bodies.push_back(walker);
  s.noise.joint_pos_sigma_m = 0.01;
  s.noise.axis_sigma_rad = 0.01;
  s.noise.occluded_confidence = Confidence::None;
  s.noise.seed = 77;
  s.duration_s = 10.0;
  s.fps = 30.0;

  const fs::path dir = work_dir("occlusion");
  generate_session(s, dir);

  // Fuse against the exact extrinsics so the comparison isolates the
  // occlusion behaviour from calibration error.
  CalibrationResult calib;
  calib.reference_sensor_id = "cam0";
  calib.sensors.push_back({"cam0", RigidTransform{}});
  calib.sensors.push_back({"cam1", compose(invert(s.sensors[0].extrinsic), s.sensors[1].extrinsic)});
  write_calibration(dir / "calibration.json", calib);

  const PipelineConfig config = load_config(std::nullopt);
  cmd_fuse(dir, dir / "calibration.json", config, dir / "fused.jsonl");
  const nlohmann::json report = cmd_eval(dir / "fused.jsonl", dir / "ground_truth.json", dir, config);
  fs::remove_all(dir);

  const double fused_cov = report["fused"]["coverage"].get<double>();
  const double cov0 = report["sensors"]["cam0"]["coverage"].get<double>();
  const double cov1 = report["sensors"]["cam1"]["coverage"].get<double>();
  const double fused_rms = report["jointly_visible"]["fused_rms_m"].get<double>();
  const double rms0 = report["jointly_visible"]["sensor_rms_m"]["cam0"].get<double>();
  const double rms1 = report["jointly_visible"]["sensor_rms_m"]["cam1"].get<double>();
  const int jv_samples = report["jointly_visible"]["samples"].get<int>();

  detail = format(
      "coverage fused %.3f vs cam0 %.3f / cam1 %.3f; jointly-visible rms fused %.4f vs cam0 %.4f / "
      "cam1 %.4f (%d samples)",
      fused_cov, cov0, cov1, fused_rms, rms0, rms1, jv_samples);
  const bool sensors_lost_track = cov0 < 0.9 && cov1 < 0.9;
  return sensors_lost_track && fused_cov > std::max(cov0, cov1) && jv_samples > 50 &&
         fused_rms <= std::min(rms0, rms1);
}

// ---------------------------------------------------------------- 8 ---

bool criterion_determinism(std::string& detail) {
  const Scene scene = calibration_scene(424242);
  const fs::path scene_file = fs::temp_directory_path() / "skelfuse_acceptance_scene.json";
  write_scene(scene_file, scene);
  const PipelineConfig config = load_config(std::nullopt);

  std::array<std::map<std::string, std::string>, 2> artifacts;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = work_dir("determinism_" + std::to_string(run));
    cmd_simulate(scene_file, dir, 424242);
    cmd_calibrate(dir, config, dir / "calibration.json");
    cmd_fuse(dir, dir / "calibration.json", config, dir / "fused.jsonl");
    const nlohmann::json report = cmd_eval(dir / "fused.jsonl", dir / "ground_truth.json", dir, config);
    for (const auto& entry : fs::directory_iterator(dir)) {
      artifacts[run][entry.path().filename().string()] = slurp(entry.path());
    }
    artifacts[run]["<eval stdout>"] = report.dump();
    fs::remove_all(dir);
  }
  fs::remove(scene_file);

  if (artifacts[0].size() != artifacts[1].size()) {
    detail = format("artifact count differs: %zu vs %zu", artifacts[0].size(), artifacts[1].size());
    return false;
  }
  int mismatched = 0;
  std::string first;
  for (const auto& [name, bytes] : artifacts[0]) {
    const auto it = artifacts[1].find(name);
    if (it == artifacts[1].end() || it->second != bytes) {
      ++mismatched;
      if (first.empty()) first = name;
    }
  }
  detail = format("%zu artifacts compared across both runs, %d mismatched%s%s", artifacts[0].size(),
                  mismatched, mismatched ? ", first: " : "", first.c_str());
  return mismatched == 0;
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    double budget_s;
    std::function<bool(std::string&)> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "geometry suite", 10, criterion_geometry},
      {2, "back-projection round trip", 5, criterion_backprojection},
      {3, "icp recovery", 60, criterion_icp},
      {4, "end-to-end calibration", 300, criterion_calibration},
      {5, "matching", 60, criterion_matching},
      {6, "merging", 10, criterion_merging},
      {7, "occlusion resilience", 60, criterion_occlusion},
      {8, "pipeline determinism", 300, criterion_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    std::string det;
    try {
      ok = c.fn(det);
    } catch (const std::exception& e) {
      det = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > c.budget_s) {
      ok = false;
      det += format(" [over budget: %.1f s > %.0f s]", elapsed, c.budget_s);
    }
    std::printf("[%s] criterion %d: %s (%.1f s) - %s\n", ok ? "PASS" : "FAIL", c.number, c.name,
                elapsed, det.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures) std::printf("%d criterion(s) FAILED\n", failures);
  return failures;
}
