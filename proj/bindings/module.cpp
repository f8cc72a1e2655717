#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "skelfuse/calibration.hpp"
#include "skelfuse/io.hpp"
#include "skelfuse/matching.hpp"
#include "skelfuse/merging.hpp"
#include "skelfuse/pipeline.hpp"
#include "skelfuse/sensor_model.hpp"
#include "skelfuse/simulator.hpp"
#include "skelfuse/skeleton.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace skelfuse;

namespace {

PipelineConfig config_from(const std::optional<fs::path>& config_file) {
  return load_config(config_file);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-sensor skeletal fusion toolkit";

  // --- geometry ---
  py::class_<RigidTransform>(m, "RigidTransform")
      .def(py::init<>())
      .def(py::init<Mat3, Vec3>(), "rotation"_a, "translation"_a)
      .def_readwrite("rotation", &RigidTransform::rotation)
      .def_readwrite("translation", &RigidTransform::translation)
      .def("apply", &RigidTransform::apply, "point"_a)
      .def("__repr__", [](const RigidTransform& t) {
        return "RigidTransform(angle=" + std::to_string(rotation_angle(t.rotation)) +
               " rad, |t|=" + std::to_string(t.translation.norm()) + " m)";
      });

  py::class_<AxisTriad>(m, "AxisTriad")
      .def(py::init<>())
      .def_readwrite("x", &AxisTriad::x)
      .def_readwrite("y", &AxisTriad::y)
      .def_readwrite("z", &AxisTriad::z);

  m.def("compose", &compose, "a"_a, "b"_a);
  m.def("invert", &invert, "t"_a);
  m.def("rotation_about", &rotation_about, "axis"_a, "angle_rad"_a);
  m.def("rotation_z", &rotation_z, "angle_rad"_a);
  m.def("rotation_angle", &rotation_angle, "r"_a);
  m.def("rotation_distance", &rotation_distance, "a"_a, "b"_a);
  m.def("is_rotation", &is_rotation, "m"_a, "tol"_a = kRotationTol);
  m.def("average_rotations", &average_rotations, "rotations"_a);
  m.def("average_translations", &average_translations, "translations"_a);
  m.def("align_least_squares", &align_least_squares, "pairs"_a);
  m.def("orthonormalize", py::overload_cast<const Vec3&, const Vec3&, const Vec3&>(&orthonormalize),
        "x"_a, "y"_a, "z"_a);
  m.def("triad_to_rotation", &triad_to_rotation, "triad"_a);
  m.def("rotation_to_triad", &rotation_to_triad, "rotation"_a);

  // --- sensor model ---
  py::class_<Intrinsics>(m, "Intrinsics")
      .def(py::init<>())
      .def(py::init<int, int, double, double, double, double>(), "width"_a, "height"_a, "fx"_a,
           "fy"_a, "cx"_a, "cy"_a)
      .def_readwrite("width", &Intrinsics::width)
      .def_readwrite("height", &Intrinsics::height)
      .def_readwrite("fx", &Intrinsics::fx)
      .def_readwrite("fy", &Intrinsics::fy)
      .def_readwrite("cx", &Intrinsics::cx)
      .def_readwrite("cy", &Intrinsics::cy);

  py::class_<DepthImage>(m, "DepthImage")
      .def(py::init<>())
      .def_readwrite("intrinsics", &DepthImage::intrinsics)
      .def_readwrite("data", &DepthImage::data);

  py::class_<PointCloud>(m, "PointCloud")
      .def(py::init<>())
      .def_readwrite("points", &PointCloud::points)
      .def("__len__", &PointCloud::size);

  py::class_<PixelProjection>(m, "PixelProjection")
      .def_readonly("u", &PixelProjection::u)
      .def_readonly("v", &PixelProjection::v)
      .def_readonly("depth_mm", &PixelProjection::depth_mm);

  m.def("backproject", &backproject, "image"_a);
  m.def("backproject_pixel", &backproject_pixel, "intrinsics"_a, "u"_a, "v"_a, "depth_mm"_a);
  m.def("project", &project, "point"_a, "intrinsics"_a);
  m.def("filter_radius", &filter_radius, "cloud"_a, "center"_a, "radius_m"_a);
  m.def("voxel_downsample", &voxel_downsample, "cloud"_a, "cell_m"_a);
  m.def("transform_cloud", &transform_cloud, "t"_a, "cloud"_a);

  // --- skeletons ---
  py::enum_<Confidence>(m, "Confidence")
      .value("NONE", Confidence::None)
      .value("LOW", Confidence::Low)
      .value("MEDIUM", Confidence::Medium)
      .value("HIGH", Confidence::High);

  py::enum_<JointId>(m, "JointId")
      .value("PELVIS", JointId::Pelvis)
      .value("SPINE_CHEST", JointId::SpineChest)
      .value("NECK", JointId::Neck)
      .value("HEAD", JointId::Head)
      .value("SHOULDER_L", JointId::ShoulderL)
      .value("SHOULDER_R", JointId::ShoulderR)
      .value("ELBOW_L", JointId::ElbowL)
      .value("ELBOW_R", JointId::ElbowR)
      .value("HAND_L", JointId::HandL)
      .value("HAND_R", JointId::HandR)
      .value("FOOT_L", JointId::FootL)
      .value("FOOT_R", JointId::FootR);

  py::class_<Joint>(m, "Joint")
      .def(py::init<>())
      .def_readwrite("id", &Joint::id)
      .def_readwrite("position", &Joint::position)
      .def_readwrite("axes", &Joint::axes)
      .def_readwrite("confidence", &Joint::confidence);

  py::class_<Skeleton>(m, "Skeleton")
      .def(py::init<>())
      .def_readwrite("body_id", &Skeleton::body_id)
      .def_readwrite("joints", &Skeleton::joints)
      .def("pelvis", &Skeleton::pelvis, py::return_value_policy::copy);

  py::class_<SkeletonFrame>(m, "SkeletonFrame")
      .def(py::init<>())
      .def_readwrite("sensor_id", &SkeletonFrame::sensor_id)
      .def_readwrite("timestamp_us", &SkeletonFrame::timestamp_us)
      .def_readwrite("skeletons", &SkeletonFrame::skeletons);

  py::class_<TrackingAreaConfig>(m, "TrackingAreaConfig")
      .def(py::init<>())
      .def_readwrite("min_sensor_distance", &TrackingAreaConfig::min_sensor_distance)
      .def_readwrite("area_polygon", &TrackingAreaConfig::area_polygon);

  m.def("transform_skeleton", &transform_skeleton, "t"_a, "skeleton"_a);
  m.def("interpolate_frames", &interpolate_frames, "f0"_a, "f1"_a, "t_us"_a,
        "tau_hold_us"_a = kDefaultTauHoldUs);
  m.def("filter_skeletons", &filter_skeletons, "frame"_a, "sensor_pose"_a, "config"_a);

  // --- matching ---
  py::class_<MatchConfig>(m, "MatchConfig")
      .def(py::init<>())
      .def_readwrite("d_easy", &MatchConfig::d_easy)
      .def_readwrite("d_max", &MatchConfig::d_max);

  py::class_<MatchHistory>(m, "MatchHistory")
      .def(py::init<>())
      .def_readwrite("pairs", &MatchHistory::pairs)
      .def("contains", &MatchHistory::contains, "body_a"_a, "body_b"_a);

  py::class_<CandidatePair>(m, "CandidatePair")
      .def_readonly("index_a", &CandidatePair::index_a)
      .def_readonly("index_b", &CandidatePair::index_b)
      .def_readonly("distance", &CandidatePair::distance);

  py::class_<MatchedPair>(m, "MatchedPair")
      .def_readonly("a", &MatchedPair::a)
      .def_readonly("b", &MatchedPair::b)
      .def_readonly("distance", &MatchedPair::distance);

  py::class_<MatchOutcome>(m, "MatchOutcome")
      .def_readonly("pairs", &MatchOutcome::pairs)
      .def_readonly("isolated_a", &MatchOutcome::isolated_a)
      .def_readonly("isolated_b", &MatchOutcome::isolated_b);

  m.def("candidate_pairs", &candidate_pairs, "a"_a, "b"_a, "d_max"_a);
  m.def("match_skeletons", &match_skeletons, "a"_a, "b"_a, "config"_a = MatchConfig{},
        "history"_a = MatchHistory{});
  m.def("fuse_match_history", &fuse_match_history, "outcome"_a);

  // --- merging ---
  py::class_<WeightTable>(m, "WeightTable")
      .def(py::init<>())
      .def_readwrite("none", &WeightTable::none)
      .def_readwrite("low", &WeightTable::low)
      .def_readwrite("medium", &WeightTable::medium)
      .def_readwrite("high", &WeightTable::high)
      .def("weight", &WeightTable::weight, "confidence"_a);

  m.def("weight_of", &weight_of, "confidence"_a);
  m.def("merge_joint", &merge_joint, "i"_a, "j"_a, "weights"_a = WeightTable{});
  m.def("merge_skeletons", &merge_skeletons, "a"_a, "b"_a, "fused_body_id"_a,
        "weights"_a = WeightTable{});

  py::class_<Provenance>(m, "Provenance")
      .def_property_readonly("is_merged",
                             [](const Provenance& p) { return p.kind == Provenance::Kind::Merged; })
      .def_readonly("contributors", &Provenance::contributors)
      .def_readonly("pair_distance", &Provenance::pair_distance);

  py::class_<FusedPerson>(m, "FusedPerson")
      .def_readonly("skeleton", &FusedPerson::skeleton)
      .def_readonly("provenance", &FusedPerson::provenance);

  py::class_<FusedFrame>(m, "FusedFrame")
      .def_readonly("timestamp_us", &FusedFrame::timestamp_us)
      .def_readonly("persons", &FusedFrame::persons);

  m.def("fuse_frame", &fuse_frame, "outcome"_a, "sensor_id_a"_a, "sensor_id_b"_a, "t_us"_a,
        "weights"_a = WeightTable{});

  // --- calibration ---
  py::class_<IcpParams>(m, "IcpParams")
      .def(py::init<>())
      .def_readwrite("max_iterations", &IcpParams::max_iterations)
      .def_readwrite("convergence_eps", &IcpParams::convergence_eps)
      .def_readwrite("max_correspondence_dist", &IcpParams::max_correspondence_dist)
      .def_readwrite("downsample_cell", &IcpParams::downsample_cell);

  py::class_<IcpResult>(m, "IcpResult")
      .def_readonly("transform", &IcpResult::transform)
      .def_readonly("rms", &IcpResult::rms)
      .def_readonly("iterations", &IcpResult::iterations)
      .def_readonly("converged", &IcpResult::converged)
      .def_readonly("rms_history", &IcpResult::rms_history);

  m.def("estimate_from_skeletons", &estimate_from_skeletons, "sa"_a, "sb"_a,
        "min_confidence"_a = Confidence::Medium);
  m.def("icp", &icp, "source"_a, "target"_a, "init"_a = RigidTransform{}, "params"_a = IcpParams{});

  // --- pipeline commands ---
  m.def(
      "simulate",
      [](const fs::path& scene_file, const fs::path& out_dir, std::optional<uint64_t> seed) {
        const SessionSummary s = cmd_simulate(scene_file, out_dir, seed);
        py::dict d;
        d["sensor_count"] = s.sensor_count;
        d["frames_per_sensor"] = s.frames_per_sensor;
        d["depth_images"] = s.depth_images;
        d["seed"] = s.seed;
        return d;
      },
      "scene_file"_a, "out_dir"_a, "seed"_a = std::nullopt);

  m.def(
      "cloud",
      [](const fs::path& pgm, const fs::path& meta, const fs::path& ply) {
        return cmd_cloud(pgm, meta, ply);
      },
      "depth_pgm"_a, "meta_json"_a, "out_ply"_a);

  m.def(
      "calibrate",
      [](const fs::path& session_dir, const fs::path& out_json, std::optional<fs::path> config_file) {
        const CalibrationResult r = cmd_calibrate(session_dir, config_from(config_file), out_json);
        py::dict sensors;
        for (const SensorExtrinsic& s : r.sensors) {
          sensors[py::str(s.sensor_id)] = to_mat4_row_major(s.extrinsic);
        }
        py::dict d;
        d["reference_sensor_id"] = r.reference_sensor_id;
        d["sensors"] = sensors;
        return d;
      },
      "session_dir"_a, "out_json"_a, "config_file"_a = std::nullopt);

  m.def(
      "fuse",
      [](const fs::path& session_dir, const fs::path& calibration, const fs::path& out_jsonl,
         std::optional<fs::path> config_file) {
        const FuseSummary s = cmd_fuse(session_dir, calibration, config_from(config_file), out_jsonl);
        py::dict d;
        d["ticks"] = s.ticks;
        d["sensor_count"] = s.sensor_count;
        d["reference_sensor_id"] = s.reference_sensor_id;
        return d;
      },
      "session_dir"_a, "calibration_json"_a, "out_jsonl"_a, "config_file"_a = std::nullopt);

  m.def(
      "evaluate_json",
      [](const fs::path& fused, const fs::path& ground_truth, std::optional<fs::path> session_dir,
         std::optional<fs::path> config_file) {
        return cmd_eval(fused, ground_truth, session_dir, config_from(config_file)).dump();
      },
      "fused_jsonl"_a, "ground_truth_json"_a, "session_dir"_a = std::nullopt,
      "config_file"_a = std::nullopt);
}
