#include "skelfuse/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "skelfuse/io.hpp"

namespace skelfuse {

using nlohmann::json;

PipelineConfig load_config(const std::optional<fs::path>& path) {
  PipelineConfig cfg;
  if (!path) return cfg;
  std::ifstream in(*path);
  if (!in) throw std::runtime_error("cannot open config '" + path->string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("'" + path->string() + "': " + e.what());
  }
  try {
    if (j.contains("icp")) {
      const json& ji = j["icp"];
      cfg.calibration.icp.max_iterations = ji.value("max_iterations", cfg.calibration.icp.max_iterations);
      cfg.calibration.icp.convergence_eps = ji.value("convergence_eps_m", cfg.calibration.icp.convergence_eps);
      cfg.calibration.icp.max_correspondence_dist =
          ji.value("max_correspondence_dist_m", cfg.calibration.icp.max_correspondence_dist);
      cfg.calibration.icp.downsample_cell = ji.value("downsample_cell_m", cfg.calibration.icp.downsample_cell);
    }
    cfg.calibration.icp_runs = j.value("icp_runs", cfg.calibration.icp_runs);
    cfg.calibration.r_person_m = j.value("r_person_m", cfg.calibration.r_person_m);
    if (j.contains("min_joint_confidence")) {
      cfg.calibration.min_joint_confidence = confidence_from_string(j["min_joint_confidence"]);
    }
    cfg.reference_sensor_id = j.value("reference_sensor_id", cfg.reference_sensor_id);
    if (j.contains("match")) {
      cfg.match.d_easy = j["match"].value("d_easy_m", cfg.match.d_easy);
      cfg.match.d_max = j["match"].value("d_max_m", cfg.match.d_max);
    }
    if (j.contains("tracking_area")) {
      const json& jt = j["tracking_area"];
      cfg.tracking_area.min_sensor_distance =
          jt.value("min_sensor_distance_m", cfg.tracking_area.min_sensor_distance);
      if (jt.contains("area_polygon")) {
        for (const json& jv : jt["area_polygon"]) {
          cfg.tracking_area.area_polygon.emplace_back(jv.at(0).get<double>(), jv.at(1).get<double>());
        }
      }
    }
    if (j.contains("weights")) {
      const json& jw = j["weights"];
      cfg.weights.none = jw.value("none", cfg.weights.none);
      cfg.weights.low = jw.value("low", cfg.weights.low);
      cfg.weights.medium = jw.value("medium", cfg.weights.medium);
      cfg.weights.high = jw.value("high", cfg.weights.high);
    }
    cfg.tick_rate_hz = j.value("tick_rate_hz", cfg.tick_rate_hz);
    cfg.tau_hold_us = j.value("tau_hold_us", cfg.tau_hold_us);
  } catch (const json::exception& e) {
    throw std::runtime_error("'" + path->string() + "': " + e.what());
  }
  validate(cfg.calibration.icp);
  validate(cfg.match);
  validate(cfg.weights);
  if (!(cfg.tick_rate_hz > 0)) throw std::runtime_error("config: tick_rate_hz must be positive");
  if (cfg.tau_hold_us < 0) throw std::runtime_error("config: tau_hold_us must be non-negative");
  if (cfg.tracking_area.min_sensor_distance < 0) {
    throw std::runtime_error("config: min_sensor_distance_m must be non-negative");
  }
  return cfg;
}

Session load_session(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("session directory '" + dir.string() + "' not found");
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());

  std::map<std::string, SessionSensor> sensors;
  for (const fs::path& p : entries) {
    const std::string name = p.filename().string();
    if (name.rfind("skeleton_", 0) == 0 && p.extension() == ".jsonl") {
      auto frames = read_skeleton_stream(p);
      if (frames.empty()) continue;
      const std::string id = frames.front().sensor_id;
      auto& sensor = sensors[id];
      sensor.sensor_id = id;
      sensor.frames = std::move(frames);
    }
  }
  for (const fs::path& p : entries) {
    if (p.extension() != ".pgm") continue;
    fs::path meta_path = p;
    meta_path.replace_extension(".json");
    if (!fs::exists(meta_path)) continue;
    const DepthMeta meta = read_depth_meta(meta_path);
    auto it = sensors.find(meta.sensor_id);
    if (it == sensors.end()) continue;  // depth for a sensor without a stream
    it->second.depths.push_back({p, meta_path, meta.timestamp_us});
  }

  Session session;
  for (auto& [id, sensor] : sensors) {
    std::sort(sensor.depths.begin(), sensor.depths.end(),
              [](const SessionDepth& l, const SessionDepth& r) { return l.timestamp_us < r.timestamp_us; });
    session.sensors.push_back(std::move(sensor));
  }
  if (session.sensors.empty()) {
    throw std::runtime_error("session directory '" + dir.string() + "' has no skeleton streams");
  }
  return session;
}

SkeletonFrame stream_at(const SessionSensor& sensor, int64_t t_us, int64_t tau_hold_us) {
  const auto& frames = sensor.frames;
  if (frames.empty()) throw std::runtime_error("sensor '" + sensor.sensor_id + "' has no frames");
  if (t_us < frames.front().timestamp_us || t_us > frames.back().timestamp_us) {
    throw std::runtime_error("sensor '" + sensor.sensor_id + "': time " + std::to_string(t_us) +
                             " outside the recorded range");
  }
  const auto after = std::lower_bound(frames.begin(), frames.end(), t_us,
                                      [](const SkeletonFrame& f, int64_t t) { return f.timestamp_us < t; });
  const auto& f1 = *after;
  const auto& f0 = after == frames.begin() ? *after : *(after - 1);
  return interpolate_frames(f0, f1, t_us, tau_hold_us);
}

SessionSummary cmd_simulate(const fs::path& scene_file, const fs::path& out_dir,
                            std::optional<uint64_t> seed_override) {
  Scene scene = read_scene(scene_file);
  if (seed_override) scene.noise.seed = *seed_override;
  return generate_session(scene, out_dir);
}

size_t cmd_cloud(const fs::path& depth_pgm, const fs::path& meta_json, const fs::path& out_ply) {
  const DepthImage img = load_depth(depth_pgm, meta_json);
  const PointCloud cloud = backproject(img);
  write_ply(out_ply, cloud);
  return cloud.points.size();
}

CalibrationResult cmd_calibrate(const fs::path& session_dir, const PipelineConfig& config,
                                const fs::path& out_json) {
  const Session session = load_session(session_dir);

  std::string ref_id = config.reference_sensor_id;
  if (ref_id.empty()) {
    ref_id = session.sensors.front().sensor_id;  // sensors are sorted by id
  }
  const SessionSensor* ref = nullptr;
  for (const SessionSensor& s : session.sensors) {
    if (s.sensor_id == ref_id) ref = &s;
  }
  if (!ref) throw std::runtime_error("reference sensor '" + ref_id + "' not found in session");

  auto capture_at = [&](const SessionSensor& sensor, int64_t t_shared,
                        const SessionDepth& depth) -> SensorCapture {
    SensorCapture cap;
    cap.sensor_id = sensor.sensor_id;
    cap.depth = load_depth(depth.pgm_path, depth.meta_path);
    try {
      cap.skeletons = stream_at(sensor, t_shared, config.tau_hold_us);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("calibration stage 'stream interpolation': ") + e.what());
    }
    return cap;
  };

  CalibrationResult result;
  result.reference_sensor_id = ref_id;
  result.sensors.push_back({ref_id, RigidTransform{}});

  for (const SessionSensor& other : session.sensors) {
    if (other.sensor_id == ref_id) continue;
    if (ref->depths.empty() || other.depths.empty()) {
      throw std::runtime_error("calibration stage 'point clouds': no depth image recorded for sensor '" +
                               (ref->depths.empty() ? ref_id : other.sensor_id) + "'");
    }
    // First marked calibration instant; skeletons are interpolated to
    // the midpoint of the two shifted depth captures, clamped into the
    // overlap of the recorded streams.
    const SessionDepth& depth_ref = ref->depths.front();
    const SessionDepth& depth_other = other.depths.front();
    const int64_t overlap_lo =
        std::max(ref->frames.front().timestamp_us, other.frames.front().timestamp_us);
    const int64_t overlap_hi =
        std::min(ref->frames.back().timestamp_us, other.frames.back().timestamp_us);
    if (overlap_lo > overlap_hi) {
      throw std::runtime_error("calibration stage 'stream interpolation': streams of '" + ref_id +
                               "' and '" + other.sensor_id + "' never overlap in time");
    }
    const int64_t t_shared = std::clamp((depth_ref.timestamp_us + depth_other.timestamp_us) / 2,
                                        overlap_lo, overlap_hi);

    const SensorCapture cap_ref = capture_at(*ref, t_shared, depth_ref);
    const SensorCapture cap_other = capture_at(other, t_shared, depth_other);
    const PairCalibration pair = calibrate_pair(cap_ref, cap_other, config.calibration);

    result.sensors.push_back({other.sensor_id, pair.extrinsic});
    result.diagnostics.push_back({other.sensor_id, pair.initial, pair.icp_result.rms,
                                  pair.icp_result.iterations, pair.icp_result.converged});
  }

  write_calibration(out_json, result);
  return result;
}

namespace {

// A person being assembled during the left fold across sensors.
struct WipPerson {
  Skeleton skeleton;  // body_id = first contributor's id
  Provenance provenance;
};

std::vector<WipPerson> start_fold(const SkeletonFrame& frame) {
  std::vector<WipPerson> persons;
  for (const Skeleton& s : frame.skeletons) {
    WipPerson p;
    p.skeleton = s;
    p.provenance.kind = Provenance::Kind::Isolated;
    p.provenance.contributors = {{frame.sensor_id, s.body_id}};
    persons.push_back(std::move(p));
  }
  return persons;
}

std::vector<WipPerson> fold_step(std::vector<WipPerson> persons, const SkeletonFrame& next,
                                 const MatchConfig& match_cfg, const WeightTable& weights,
                                 MatchHistory& history) {
  std::vector<Skeleton> left;
  std::set<int> left_ids;
  bool unique_ids = true;
  for (const WipPerson& p : persons) {
    left.push_back(p.skeleton);
    unique_ids = unique_ids && left_ids.insert(p.skeleton.body_id).second;
  }
  if (!unique_ids) {  // contributor ids collided across sensors; reindex
    for (size_t i = 0; i < left.size(); ++i) left[i].body_id = static_cast<int>(i);
  }

  const MatchOutcome outcome = match_skeletons(left, next.skeletons, match_cfg, history);
  history = fuse_match_history(outcome);

  std::map<int, size_t> person_by_id;
  for (size_t i = 0; i < left.size(); ++i) person_by_id[left[i].body_id] = i;

  std::vector<WipPerson> out;
  std::set<size_t> merged_left;
  for (const MatchedPair& pair : outcome.pairs) {
    const size_t idx = person_by_id.at(pair.a.body_id);
    merged_left.insert(idx);
    WipPerson p = persons[idx];
    p.skeleton = merge_skeletons(p.skeleton, pair.b, p.skeleton.body_id, weights);
    p.provenance.kind = Provenance::Kind::Merged;
    p.provenance.contributors.emplace_back(next.sensor_id, pair.b.body_id);
    p.provenance.pair_distance = pair.distance;
    out.push_back(std::move(p));
  }
  for (size_t i = 0; i < persons.size(); ++i) {
    if (!merged_left.count(i)) out.push_back(persons[i]);
  }
  for (const Skeleton& s : outcome.isolated_b) {
    WipPerson p;
    p.skeleton = s;
    p.provenance.kind = Provenance::Kind::Isolated;
    p.provenance.contributors = {{next.sensor_id, s.body_id}};
    out.push_back(std::move(p));
  }
  return out;
}

FusedFrame assemble_fold(std::vector<WipPerson> persons, int64_t t_us) {
  std::stable_sort(persons.begin(), persons.end(), [](const WipPerson& l, const WipPerson& r) {
    const bool lm = l.provenance.kind == Provenance::Kind::Merged;
    const bool rm = r.provenance.kind == Provenance::Kind::Merged;
    if (lm != rm) return lm;  // merged first
    if (lm && rm) return l.provenance.pair_distance < r.provenance.pair_distance;
    return l.provenance.contributors.front() < r.provenance.contributors.front();
  });
  FusedFrame frame;
  frame.timestamp_us = t_us;
  for (WipPerson& p : persons) {
    p.skeleton.body_id = static_cast<int>(frame.persons.size());
    frame.persons.push_back({std::move(p.skeleton), std::move(p.provenance)});
  }
  return frame;
}

}  // namespace

FuseSummary cmd_fuse(const fs::path& session_dir, const fs::path& calibration_json,
                     const PipelineConfig& config, const fs::path& out_jsonl) {
  validate(config.match);
  validate(config.weights);
  const Session session = load_session(session_dir);
  const CalibrationResult calib = read_calibration(calibration_json);

  // Fold order: reference sensor first, remaining sensors by id.
  std::vector<const SessionSensor*> order;
  for (const SessionSensor& s : session.sensors) {
    extrinsic_of(calib, s.sensor_id);  // throws for unknown sensors
    if (s.sensor_id == calib.reference_sensor_id) {
      order.insert(order.begin(), &s);
    } else {
      order.push_back(&s);
    }
  }

  const int64_t period_us = std::llround(1e6 / config.tick_rate_hz);
  if (period_us <= 0) throw std::runtime_error("tick rate too high");
  int64_t t_start = std::numeric_limits<int64_t>::min();
  int64_t t_end = std::numeric_limits<int64_t>::max();
  for (const SessionSensor& s : session.sensors) {
    if (s.frames.empty()) throw std::runtime_error("sensor '" + s.sensor_id + "' stream is empty");
    t_start = std::max(t_start, s.frames.front().timestamp_us);
    t_end = std::min(t_end, s.frames.back().timestamp_us);
  }

  std::vector<FusedFrame> fused;
  if (order.size() == 2) {
    // Straight two-sensor pipeline with rolling match history.
    MatchHistory history;
    for (int64_t t = t_start; t <= t_end; t += period_us) {
      std::array<SkeletonFrame, 2> world;
      for (int k = 0; k < 2; ++k) {
        const RigidTransform& pose = extrinsic_of(calib, order[k]->sensor_id);
        world[k] = filter_skeletons(transform_frame(pose, stream_at(*order[k], t, config.tau_hold_us)),
                                    pose, config.tracking_area);
      }
      const MatchOutcome outcome =
          match_skeletons(world[0].skeletons, world[1].skeletons, config.match, history);
      history = fuse_match_history(outcome);
      fused.push_back(fuse_frame(outcome, order[0]->sensor_id, order[1]->sensor_id, t, config.weights));
    }
  } else {
    std::vector<MatchHistory> histories(order.size() > 1 ? order.size() - 1 : 0);
    for (int64_t t = t_start; t <= t_end; t += period_us) {
      std::vector<WipPerson> persons;
      for (size_t k = 0; k < order.size(); ++k) {
        const RigidTransform& pose = extrinsic_of(calib, order[k]->sensor_id);
        const SkeletonFrame world =
            filter_skeletons(transform_frame(pose, stream_at(*order[k], t, config.tau_hold_us)), pose,
                             config.tracking_area);
        if (k == 0) {
          persons = start_fold(world);
        } else {
          persons = fold_step(std::move(persons), world, config.match, config.weights, histories[k - 1]);
        }
      }
      fused.push_back(assemble_fold(std::move(persons), t));
    }
  }

  write_fused_stream(out_jsonl, calib.reference_sensor_id, fused);
  return {static_cast<int>(fused.size()), static_cast<int>(session.sensors.size()),
          calib.reference_sensor_id};
}

namespace {

struct GtIndex {
  const GroundTruth* gt = nullptr;
  int64_t first_ts = 0;
  int64_t last_ts = 0;
  int64_t period = 1;

  // body index -> joint id -> interpolated world position
  std::map<int, std::map<JointId, Vec3>> at(int64_t t_us) const {
    const auto& frames = gt->frames;
    const auto after = std::lower_bound(
        frames.begin(), frames.end(), t_us,
        [](const GroundTruthFrame& f, int64_t t) { return f.timestamp_us < t; });
    const GroundTruthFrame& f1 = after == frames.end() ? frames.back() : *after;
    const GroundTruthFrame& f0 = after == frames.begin() ? frames.front()
                                 : after == frames.end() ? frames.back()
                                                         : *(after - 1);
    const int64_t span = f1.timestamp_us - f0.timestamp_us;
    const double alpha =
        span == 0 ? 0.0
                  : std::clamp(static_cast<double>(t_us - f0.timestamp_us) / static_cast<double>(span), 0.0, 1.0);
    std::map<int, std::map<JointId, Vec3>> out;
    for (const GroundTruthBody& b0 : f0.bodies) {
      const GroundTruthBody* b1 = nullptr;
      for (const GroundTruthBody& b : f1.bodies) {
        if (b.body_index == b0.body_index) b1 = &b;
      }
      auto& joints = out[b0.body_index];
      for (const auto& [id, p0] : b0.joints) {
        Vec3 p = p0;
        if (b1) {
          for (const auto& [id1, p1] : b1->joints) {
            if (id1 == id) p = p0 + alpha * (p1 - p0);
          }
        }
        joints[id] = p;
      }
    }
    return out;
  }
};

GtIndex make_gt_index(const GroundTruth& gt) {
  if (gt.frames.empty()) throw std::runtime_error("ground truth has no frames");
  GtIndex idx;
  idx.gt = &gt;
  idx.first_ts = gt.frames.front().timestamp_us;
  idx.last_ts = gt.frames.back().timestamp_us;
  idx.period = gt.frames.size() > 1 ? gt.frames[1].timestamp_us - gt.frames[0].timestamp_us : 1;
  return idx;
}

int resolve_body_index(const GroundTruth& gt, const std::string& sensor_id, int body_id) {
  const auto sensor_it = gt.body_ids.find(sensor_id);
  if (sensor_it == gt.body_ids.end()) {
    throw std::runtime_error("ground truth has no body id map for sensor '" + sensor_id + "'");
  }
  const auto body_it = sensor_it->second.find(body_id);
  if (body_it == sensor_it->second.end()) {
    throw std::runtime_error("ground truth: unknown body id " + std::to_string(body_id) + " for sensor '" +
                             sensor_id + "'");
  }
  return body_it->second;
}

struct RmsAccum {
  double sq_sum = 0;
  size_t samples = 0;

  void add(const Vec3& err) {
    sq_sum += err.squaredNorm();
    samples += 1;
  }
  double rms() const { return samples == 0 ? 0.0 : std::sqrt(sq_sum / static_cast<double>(samples)); }
};

}  // namespace

json cmd_eval(const fs::path& fused_jsonl, const fs::path& ground_truth_json,
              const std::optional<fs::path>& session_dir, const PipelineConfig& config) {
  std::string ref_id;
  const std::vector<FusedFrame> fused = read_fused_stream(fused_jsonl, &ref_id);
  if (fused.empty()) throw std::runtime_error("fused stream '" + fused_jsonl.string() + "' is empty");
  const GroundTruth gt = read_ground_truth(ground_truth_json);
  const GtIndex gt_index = make_gt_index(gt);

  const RigidTransform* gauge = nullptr;  // fused frame -> ground-truth world
  for (const SensorExtrinsic& s : gt.sensors) {
    if (s.sensor_id == ref_id) gauge = &s.extrinsic;
  }
  if (!gauge) {
    throw std::runtime_error("fused stream reference sensor '" + ref_id + "' is not in the ground truth");
  }

  std::optional<Session> session;
  if (session_dir) session = load_session(*session_dir);

  size_t correct_ticks = 0;
  double coverage_sum = 0;
  RmsAccum fused_rms;
  std::map<JointId, RmsAccum> fused_rms_per_joint;
  std::map<std::string, RmsAccum> sensor_rms;
  std::map<std::string, double> sensor_coverage_sum;
  RmsAccum joint_visible_fused;
  std::map<std::string, RmsAccum> joint_visible_sensor;
  size_t jointly_visible_samples = 0;

  for (const FusedFrame& frame : fused) {
    const int64_t t = frame.timestamp_us;
    if (t < gt_index.first_ts - gt_index.period || t > gt_index.last_ts + gt_index.period) {
      throw std::runtime_error("fused timestamp " + std::to_string(t) +
                               " is outside the ground-truth range");
    }
    const auto truth = gt_index.at(t);

    bool tick_correct = true;
    std::set<int> represented;
    std::map<int, const FusedPerson*> person_of_body;
    for (const FusedPerson& person : frame.persons) {
      int body_index = -1;
      bool consistent = true;
      for (const auto& [sensor, body_id] : person.provenance.contributors) {
        const int idx = resolve_body_index(gt, sensor, body_id);
        if (body_index == -1) body_index = idx;
        consistent = consistent && idx == body_index;
      }
      if (!consistent) {
        tick_correct = false;
        continue;  // mixed-person merge; no single truth to score against
      }
      if (!represented.insert(body_index).second) {
        tick_correct = false;  // one true person split across outputs
        continue;
      }
      person_of_body[body_index] = &person;

      const auto truth_body = truth.find(body_index);
      if (truth_body == truth.end()) continue;
      for (const Joint& j : person.skeleton.joints) {
        if (j.confidence == Confidence::None) continue;
        const auto it = truth_body->second.find(j.id);
        if (it == truth_body->second.end()) continue;
        const Vec3 err = gauge->apply(j.position) - it->second;
        fused_rms.add(err);
        fused_rms_per_joint[j.id].add(err);
      }
    }
    if (tick_correct) ++correct_ticks;
    if (gt.body_count > 0) {
      coverage_sum += static_cast<double>(represented.size()) / gt.body_count;
    }

    if (!session) continue;

    // Per-sensor baselines against the same ground truth, using the
    // true extrinsics rather than any estimated calibration.
    std::map<int, std::map<std::string, const Skeleton*>> seen_by;  // body index -> sensor -> skeleton
    std::map<std::string, SkeletonFrame> sensor_world;
    for (const SessionSensor& sensor : session->sensors) {
      const RigidTransform* pose = nullptr;
      for (const SensorExtrinsic& s : gt.sensors) {
        if (s.sensor_id == sensor.sensor_id) pose = &s.extrinsic;
      }
      if (!pose) {
        throw std::runtime_error("session sensor '" + sensor.sensor_id + "' is not in the ground truth");
      }
      SkeletonFrame& world = sensor_world[sensor.sensor_id];
      world = transform_frame(*pose, stream_at(sensor, t, config.tau_hold_us));
      for (const Skeleton& skel : world.skeletons) {
        const int body_index = resolve_body_index(gt, sensor.sensor_id, skel.body_id);
        seen_by[body_index][sensor.sensor_id] = &skel;
        const auto truth_body = truth.find(body_index);
        if (truth_body == truth.end()) continue;
        for (const Joint& j : skel.joints) {
          if (j.confidence == Confidence::None) continue;
          const auto it = truth_body->second.find(j.id);
          if (it == truth_body->second.end()) continue;
          sensor_rms[sensor.sensor_id].add(j.position - it->second);
        }
      }
      if (gt.body_count > 0) {
        sensor_coverage_sum[sensor.sensor_id] +=
            static_cast<double>(world.skeletons.size()) / gt.body_count;
      }
    }

    // Jointly visible spans: the body is reported by every sensor and
    // present in the fused output. Only joints every sensor tracked
    // (confidence above None) enter the comparison, so fused and
    // per-sensor errors are measured over the same samples.
    for (const auto& [body_index, by_sensor] : seen_by) {
      if (by_sensor.size() != session->sensors.size()) continue;
      const auto person_it = person_of_body.find(body_index);
      if (person_it == person_of_body.end()) continue;
      const auto truth_body = truth.find(body_index);
      if (truth_body == truth.end()) continue;
      ++jointly_visible_samples;
      std::set<JointId> shared;
      for (const auto& [id, pos] : truth_body->second) shared.insert(id);
      for (const auto& [sensor_id, skel] : by_sensor) {
        std::set<JointId> tracked;
        for (const Joint& j : skel->joints) {
          if (j.confidence != Confidence::None) tracked.insert(j.id);
        }
        std::erase_if(shared, [&](JointId id) { return !tracked.count(id); });
      }
      for (const Joint& j : person_it->second->skeleton.joints) {
        if (j.confidence == Confidence::None || !shared.count(j.id)) continue;
        joint_visible_fused.add(gauge->apply(j.position) - truth_body->second.at(j.id));
      }
      for (const auto& [sensor_id, skel] : by_sensor) {
        for (const Joint& j : skel->joints) {
          if (!shared.count(j.id)) continue;
          joint_visible_sensor[sensor_id].add(j.position - truth_body->second.at(j.id));
        }
      }
    }
  }

  json report;
  report["ticks"] = fused.size();
  report["gt_bodies"] = gt.body_count;
  report["matching_accuracy"] = static_cast<double>(correct_ticks) / fused.size();
  json per_joint = json::object();
  for (const auto& [id, acc] : fused_rms_per_joint) per_joint[to_string(id)] = acc.rms();
  report["fused"] = {{"coverage", coverage_sum / fused.size()},
                     {"rms_m", fused_rms.rms()},
                     {"rms_samples", fused_rms.samples},
                     {"per_joint_rms_m", std::move(per_joint)}};
  if (session) {
    json sensors = json::object();
    for (const SessionSensor& sensor : session->sensors) {
      sensors[sensor.sensor_id] = {{"coverage", sensor_coverage_sum[sensor.sensor_id] / fused.size()},
                                   {"rms_m", sensor_rms[sensor.sensor_id].rms()},
                                   {"rms_samples", sensor_rms[sensor.sensor_id].samples}};
    }
    report["sensors"] = std::move(sensors);
    json jv_sensors = json::object();
    for (const auto& [id, acc] : joint_visible_sensor) jv_sensors[id] = acc.rms();
    report["jointly_visible"] = {{"samples", jointly_visible_samples},
                                 {"fused_rms_m", joint_visible_fused.rms()},
                                 {"sensor_rms_m", std::move(jv_sensors)}};
  }
  return report;
}

}  // namespace skelfuse
