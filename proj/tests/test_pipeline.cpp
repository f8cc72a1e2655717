#include "skelfuse/pipeline.hpp"

#include <doctest.h>

#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skelfuse/io.hpp"
#include "skelfuse/rng.hpp"

using namespace skelfuse;

namespace {

constexpr double kPi = std::numbers::pi;

RigidTransform sensor_pose_looking_y(const Vec3& position) {
  Mat3 r;
  r.col(0) = Vec3(1, 0, 0);
  r.col(1) = Vec3(0, 0, -1);
  r.col(2) = Vec3(0, 1, 0);
  return {r, position};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("skelfuse_pipe_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Two sensors looking at a person between two props; a second person
// walks into view after half a second.
Scene pipeline_scene() {
  Scene s;
  s.floor = true;
  const Intrinsics k{160, 144, 104.0, 104.0, 80.0, 72.0};
  s.sensors.push_back({"cam0", k, sensor_pose_looking_y(Vec3(-0.9, -2.7, 1.5)), 0, 5.0});
  RigidTransform cam1 = sensor_pose_looking_y(Vec3(1.1, -2.6, 1.45));
  cam1.rotation = rotation_z(0.35) * cam1.rotation;
  s.sensors.push_back({"cam1", k, cam1, 11111, 5.0});
  s.boxes.push_back({Vec3(-1.1, 0.1, 0.0), Vec3(-0.5, 0.7, 0.9)});
  s.boxes.push_back({Vec3(0.6, 0.2, 0.0), Vec3(1.1, 0.7, 0.5)});
  s.bodies.push_back({{{0, Vec3(0.0, 0.35, 0.95), -kPi / 2}}});
  BodyModel late;  // walks into sensor range mid-session
  late.waypoints = {{0, Vec3(0.9, 3.4, 0.95), 0},
                    {400000, Vec3(0.9, 3.3, 0.95), 0},
                    {900000, Vec3(0.9, 2.2, 0.95), 0}};
  s.bodies.push_back(late);
  s.noise.joint_pos_sigma_m = 0.01;
  s.noise.axis_sigma_rad = 0.01;
  s.noise.depth_sigma_mm = 1.0;
  s.noise.seed = 31;
  s.duration_s = 1.0;
  s.fps = 30.0;
  s.calibration_times_us = {0};
  return s;
}

}  // namespace

TEST_CASE("load_config defaults and overlay") {
  const PipelineConfig def = load_config(std::nullopt);
  CHECK(def.calibration.icp.max_iterations == 50);
  CHECK(def.calibration.icp.convergence_eps == 1e-5);
  CHECK(def.calibration.icp.max_correspondence_dist == 0.2);
  CHECK(def.calibration.icp.downsample_cell == 0.02);
  CHECK(def.calibration.icp_runs == 2);
  CHECK(def.calibration.r_person_m == 2.0);
  CHECK(def.calibration.min_joint_confidence == Confidence::Medium);
  CHECK(def.match.d_easy == 0.3);
  CHECK(def.match.d_max == 0.8);
  CHECK(def.weights.low == 0.25);
  CHECK(def.tick_rate_hz == 30.0);
  CHECK(def.tau_hold_us == 50000);

  const fs::path p = fs::temp_directory_path() / "skelfuse_cfg.json";
  write_text_atomic(p, R"({
    "icp": {"max_iterations": 10, "downsample_cell_m": 0.05},
    "match": {"d_easy_m": 0.2},
    "weights": {"low": 0.3},
    "tick_rate_hz": 15.0,
    "reference_sensor_id": "camZ"
  })");
  const PipelineConfig cfg = load_config(p);
  CHECK(cfg.calibration.icp.max_iterations == 10);
  CHECK(cfg.calibration.icp.downsample_cell == 0.05);
  CHECK(cfg.calibration.icp.convergence_eps == 1e-5);  // untouched default
  CHECK(cfg.match.d_easy == 0.2);
  CHECK(cfg.match.d_max == 0.8);
  CHECK(cfg.weights.low == 0.3);
  CHECK(cfg.tick_rate_hz == 15.0);
  CHECK(cfg.reference_sensor_id == "camZ");

  write_text_atomic(p, R"({"match": {"d_easy_m": 2.0}})");  // d_easy > d_max
  CHECK_THROWS_AS(load_config(p), std::invalid_argument);
  write_text_atomic(p, R"({"tick_rate_hz": 0})");
  CHECK_THROWS_AS(load_config(p), std::runtime_error);
  fs::remove(p);
}

TEST_CASE("simulate, calibrate, fuse, eval end to end") {
  const Scene scene = pipeline_scene();
  const fs::path scene_file = fs::temp_directory_path() / "skelfuse_pipe_scene.json";
  write_scene(scene_file, scene);

  const fs::path session = temp_dir("session");
  const SessionSummary sim = cmd_simulate(scene_file, session, std::nullopt);
  CHECK(sim.sensor_count == 2);
  CHECK(sim.frames_per_sensor == 30);
  CHECK(fs::exists(session / "skeleton_cam0.jsonl"));
  CHECK(fs::exists(session / "skeleton_cam1.jsonl"));
  CHECK(fs::exists(session / "ground_truth.json"));
  CHECK(fs::exists(session / "depth_cam0_0.pgm"));
  CHECK(fs::exists(session / "depth_cam0_0.json"));

  const PipelineConfig cfg = load_config(std::nullopt);

  const fs::path calib_path = session / "calibration.json";
  const CalibrationResult calib = cmd_calibrate(session, cfg, calib_path);
  CHECK(calib.reference_sensor_id == "cam0");
  REQUIRE(calib.sensors.size() == 2);
  CHECK((extrinsic_of(calib, "cam0").rotation - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);

  // Estimated cam1->cam0 against the scene's true relative pose.
  const RigidTransform truth =
      compose(invert(scene.sensors[0].extrinsic), scene.sensors[1].extrinsic);
  const RigidTransform& est = extrinsic_of(calib, "cam1");
  CHECK(rotation_distance(est.rotation, truth.rotation) < 2 * kPi / 180);
  CHECK((est.translation - truth.translation).norm() < 0.05);

  const fs::path fused_path = session / "fused.jsonl";
  const FuseSummary fuse = cmd_fuse(session, calib_path, cfg, fused_path);
  CHECK(fuse.sensor_count == 2);
  CHECK(fuse.ticks > 20);
  CHECK(fuse.reference_sensor_id == "cam0");

  const auto fused = read_fused_stream(fused_path);
  REQUIRE(static_cast<int>(fused.size()) == fuse.ticks);
  CHECK(fused.front().persons.size() == 1);  // second person not yet in view
  CHECK(fused.back().persons.size() == 2);
  // The settled person is a two-sensor merge.
  CHECK(fused.front().persons[0].provenance.kind == Provenance::Kind::Merged);

  const nlohmann::json report = cmd_eval(fused_path, session / "ground_truth.json", session, cfg);
  CHECK(report["matching_accuracy"].get<double>() == 1.0);
  CHECK(report["fused"]["rms_m"].get<double>() < 0.05);
  CHECK(report["fused"]["coverage"].get<double>() > 0.5);
  CHECK(report["sensors"].contains("cam0"));
  CHECK(report["sensors"].contains("cam1"));
  CHECK(report["jointly_visible"]["samples"].get<int>() > 0);

  fs::remove(scene_file);
  fs::remove_all(session);
}

TEST_CASE("pipeline is byte deterministic end to end") {
  const Scene scene = pipeline_scene();
  const fs::path scene_file = fs::temp_directory_path() / "skelfuse_det_scene.json";
  write_scene(scene_file, scene);
  const PipelineConfig cfg = load_config(std::nullopt);

  std::array<std::string, 2> calib_bytes, fused_bytes, eval_bytes;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = temp_dir("det" + std::to_string(run));
    cmd_simulate(scene_file, dir, 12345);
    cmd_calibrate(dir, cfg, dir / "calibration.json");
    cmd_fuse(dir, dir / "calibration.json", cfg, dir / "fused.jsonl");
    const nlohmann::json report = cmd_eval(dir / "fused.jsonl", dir / "ground_truth.json", dir, cfg);
    calib_bytes[run] = slurp(dir / "calibration.json");
    fused_bytes[run] = slurp(dir / "fused.jsonl");
    eval_bytes[run] = report.dump();
    if (run == 1) {
      fs::remove_all(temp_dir("det0"));
      fs::remove_all(dir);
    }
  }
  CHECK(calib_bytes[0] == calib_bytes[1]);
  CHECK(fused_bytes[0] == fused_bytes[1]);
  CHECK(eval_bytes[0] == eval_bytes[1]);
  fs::remove(scene_file);
}

TEST_CASE("single-sensor fuse passes skeletons through as isolated") {
  Scene scene = pipeline_scene();
  scene.sensors.pop_back();
  scene.bodies.pop_back();
  scene.calibration_times_us.clear();
  const fs::path scene_file = fs::temp_directory_path() / "skelfuse_single_scene.json";
  write_scene(scene_file, scene);
  const fs::path session = temp_dir("single");
  cmd_simulate(scene_file, session, std::nullopt);

  // Single sensor: identity self-calibration.
  CalibrationResult calib;
  calib.reference_sensor_id = "cam0";
  calib.sensors.push_back({"cam0", RigidTransform{}});
  write_calibration(session / "calibration.json", calib);

  const PipelineConfig cfg = load_config(std::nullopt);
  cmd_fuse(session, session / "calibration.json", cfg, session / "fused.jsonl");
  const auto fused = read_fused_stream(session / "fused.jsonl");
  REQUIRE(!fused.empty());
  for (const FusedFrame& f : fused) {
    REQUIRE(f.persons.size() == 1);
    CHECK(f.persons[0].provenance.kind == Provenance::Kind::Isolated);
    CHECK(f.persons[0].provenance.contributors[0].first == "cam0");
  }
  fs::remove(scene_file);
  fs::remove_all(session);
}

TEST_CASE("fuse rejects sessions with uncalibrated sensors") {
  const Scene scene = pipeline_scene();
  const fs::path scene_file = fs::temp_directory_path() / "skelfuse_uncal_scene.json";
  write_scene(scene_file, scene);
  const fs::path session = temp_dir("uncal");
  cmd_simulate(scene_file, session, std::nullopt);

  CalibrationResult calib;  // lacks cam1
  calib.reference_sensor_id = "cam0";
  calib.sensors.push_back({"cam0", RigidTransform{}});
  write_calibration(session / "calibration.json", calib);

  const PipelineConfig cfg = load_config(std::nullopt);
  CHECK_THROWS_WITH_AS(cmd_fuse(session, session / "calibration.json", cfg, session / "fused.jsonl"),
                       doctest::Contains("cam1"), std::runtime_error);
  fs::remove(scene_file);
  fs::remove_all(session);
}

TEST_CASE("calibrate reports missing depth by sensor") {
  Scene scene = pipeline_scene();
  scene.calibration_times_us.clear();  // no depth images written
  const fs::path scene_file = fs::temp_directory_path() / "skelfuse_nodepth_scene.json";
  write_scene(scene_file, scene);
  const fs::path session = temp_dir("nodepth");
  cmd_simulate(scene_file, session, std::nullopt);
  const PipelineConfig cfg = load_config(std::nullopt);
  CHECK_THROWS_WITH_AS(cmd_calibrate(session, cfg, session / "calibration.json"),
                       doctest::Contains("no depth image"), std::runtime_error);
  fs::remove(scene_file);
  fs::remove_all(session);
}

TEST_CASE("eval scores a ground-truth copy as perfect") {
  const fs::path dir = temp_dir("evalgt");

  GroundTruth gt;
  gt.seed = 0;
  gt.body_count = 1;
  gt.sensors.push_back({"cam0", RigidTransform{}});
  gt.body_ids["cam0"][100] = 0;
  std::vector<FusedFrame> fused;
  for (int i = 0; i < 4; ++i) {
    GroundTruthFrame f;
    f.timestamp_us = i * 33333;
    GroundTruthBody b;
    b.body_index = 0;
    b.joints = {{JointId::Pelvis, Vec3(0.1 * i, 0.5, 0.95)}, {JointId::Head, Vec3(0.1 * i, 0.5, 1.6)}};
    f.bodies.push_back(b);
    gt.frames.push_back(f);

    FusedFrame ff;
    ff.timestamp_us = f.timestamp_us;
    FusedPerson person;
    person.skeleton.body_id = 0;
    for (const auto& [id, pos] : f.bodies[0].joints) {
      Joint j;
      j.id = id;
      j.position = pos;
      j.confidence = Confidence::High;
      person.skeleton.joints.push_back(j);
    }
    person.provenance.kind = Provenance::Kind::Isolated;
    person.provenance.contributors = {{"cam0", 100}};
    ff.persons.push_back(person);
    fused.push_back(ff);
  }
  write_ground_truth(dir / "gt.json", gt);
  write_fused_stream(dir / "fused.jsonl", "cam0", fused);

  const PipelineConfig cfg = load_config(std::nullopt);
  const nlohmann::json report = cmd_eval(dir / "fused.jsonl", dir / "gt.json", std::nullopt, cfg);
  CHECK(report["matching_accuracy"].get<double>() == 1.0);
  CHECK(report["fused"]["rms_m"].get<double>() == 0.0);
  CHECK(report["fused"]["coverage"].get<double>() == 1.0);

  // Timestamps outside the ground truth range are rejected.
  std::vector<FusedFrame> late = fused;
  late.back().timestamp_us = 10000000;
  write_fused_stream(dir / "late.jsonl", "cam0", late);
  CHECK_THROWS_WITH_AS(cmd_eval(dir / "late.jsonl", dir / "gt.json", std::nullopt, cfg),
                       doctest::Contains("outside"), std::runtime_error);

  // Unknown reference sensor.
  write_fused_stream(dir / "badref.jsonl", "camX", fused);
  CHECK_THROWS_WITH_AS(cmd_eval(dir / "badref.jsonl", dir / "gt.json", std::nullopt, cfg),
                       doctest::Contains("camX"), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("session loading and stream_at") {
  CHECK_THROWS_AS(load_session(fs::temp_directory_path() / "skelfuse_definitely_missing"),
                  std::runtime_error);
  const fs::path dir = temp_dir("emptysession");
  CHECK_THROWS_WITH_AS(load_session(dir), doctest::Contains("no skeleton streams"), std::runtime_error);

  SessionSensor sensor;
  sensor.sensor_id = "cam0";
  SkeletonFrame f0, f1;
  f0.sensor_id = f1.sensor_id = "cam0";
  f0.timestamp_us = 1000;
  f1.timestamp_us = 2000;
  sensor.frames = {f0, f1};
  CHECK(stream_at(sensor, 1500, 50000).timestamp_us == 1500);
  CHECK(stream_at(sensor, 1000, 50000).timestamp_us == 1000);
  CHECK(stream_at(sensor, 2000, 50000).timestamp_us == 2000);
  CHECK_THROWS_WITH_AS(stream_at(sensor, 999, 50000), doctest::Contains("outside"), std::runtime_error);
  CHECK_THROWS_WITH_AS(stream_at(sensor, 2001, 50000), doctest::Contains("outside"), std::runtime_error);
  fs::remove_all(dir);
}
