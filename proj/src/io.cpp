#include "skelfuse/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace skelfuse {

using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error("'" + path.string() + "': " + e.what());
  }
}

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::runtime_error("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

void write_text_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.good()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

void write_binary_atomic(const fs::path& path, const std::string& content) {
  write_text_atomic(path, content);
}

// --- PGM ---

void write_pgm16(const fs::path& path, int width, int height, const std::vector<uint16_t>& data) {
  if (data.size() != static_cast<size_t>(width) * height) {
    throw std::invalid_argument("pgm: data length does not match dimensions");
  }
  std::string out;
  out.reserve(32 + data.size() * 2);
  out += "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n65535\n";
  for (uint16_t v : data) {
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xff));
  }
  write_binary_atomic(path, out);
}

namespace {

// Skips PGM whitespace and '#' comments, then parses one unsigned int.
unsigned parse_pgm_uint(const std::string& s, size_t& pos, const fs::path& path) {
  while (pos < s.size()) {
    if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos]))) {
    throw std::runtime_error("'" + path.string() + "': malformed PGM header");
  }
  unsigned value = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    value = value * 10 + (s[pos] - '0');
    ++pos;
  }
  return value;
}

}  // namespace

Pgm16 read_pgm16(const fs::path& path) {
  const std::string s = read_file(path);
  if (s.size() < 2 || s[0] != 'P' || s[1] != '5') {
    throw std::runtime_error("'" + path.string() + "': not a binary PGM (P5)");
  }
  size_t pos = 2;
  Pgm16 img;
  img.width = static_cast<int>(parse_pgm_uint(s, pos, path));
  img.height = static_cast<int>(parse_pgm_uint(s, pos, path));
  const unsigned maxval = parse_pgm_uint(s, pos, path);
  if (maxval != 65535) {
    throw std::runtime_error("'" + path.string() + "': unsupported maxval " + std::to_string(maxval) +
                             " (expected 65535)");
  }
  ++pos;  // single whitespace byte after maxval
  const size_t n = static_cast<size_t>(img.width) * img.height;
  if (s.size() - pos < n * 2) throw std::runtime_error("'" + path.string() + "': truncated PGM data");
  img.data.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const auto hi = static_cast<unsigned char>(s[pos + 2 * i]);
    const auto lo = static_cast<unsigned char>(s[pos + 2 * i + 1]);
    img.data[i] = static_cast<uint16_t>((hi << 8) | lo);
  }
  return img;
}

void write_depth_meta(const fs::path& path, const DepthMeta& meta) {
  json j;
  j["width"] = meta.intrinsics.width;
  j["height"] = meta.intrinsics.height;
  j["fx"] = meta.intrinsics.fx;
  j["fy"] = meta.intrinsics.fy;
  j["cx"] = meta.intrinsics.cx;
  j["cy"] = meta.intrinsics.cy;
  j["sensor_id"] = meta.sensor_id;
  j["timestamp_us"] = meta.timestamp_us;
  write_text_atomic(path, j.dump(2) + "\n");
}

DepthMeta read_depth_meta(const fs::path& path) {
  const json j = parse_json_file(path);
  DepthMeta meta;
  try {
    meta.intrinsics.width = j.at("width").get<int>();
    meta.intrinsics.height = j.at("height").get<int>();
    meta.intrinsics.fx = j.at("fx").get<double>();
    meta.intrinsics.fy = j.at("fy").get<double>();
    meta.intrinsics.cx = j.at("cx").get<double>();
    meta.intrinsics.cy = j.at("cy").get<double>();
    meta.sensor_id = j.at("sensor_id").get<std::string>();
    meta.timestamp_us = j.at("timestamp_us").get<int64_t>();
  } catch (const json::exception& e) {
    throw std::runtime_error("'" + path.string() + "': " + e.what());
  }
  validate(meta.intrinsics);
  return meta;
}

DepthImage load_depth(const fs::path& pgm_path, const fs::path& meta_path, DepthMeta* meta_out) {
  const Pgm16 pgm = read_pgm16(pgm_path);
  const DepthMeta meta = read_depth_meta(meta_path);
  if (pgm.width != meta.intrinsics.width || pgm.height != meta.intrinsics.height) {
    throw std::runtime_error("depth image '" + pgm_path.string() + "' does not match its metadata dimensions");
  }
  if (meta_out) *meta_out = meta;
  return {meta.intrinsics, pgm.data};
}

// --- PLY ---

void write_ply(const fs::path& path, const PointCloud& cloud) {
  std::string out;
  out += "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.points.size()) +
         "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  char line[96];
  for (const Vec3& p : cloud.points) {
    std::snprintf(line, sizeof(line), "%.6f %.6f %.6f\n", p.x(), p.y(), p.z());
    out += line;
  }
  write_text_atomic(path, out);
}

PointCloud read_ply(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string line;
  size_t count = 0;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (line.rfind("element vertex", 0) == 0) count = std::stoul(line.substr(15));
    if (line == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw std::runtime_error("'" + path.string() + "': missing PLY header");
  PointCloud cloud;
  cloud.points.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    double x, y, z;
    if (!(in >> x >> y >> z)) throw std::runtime_error("'" + path.string() + "': truncated vertex list");
    cloud.points.emplace_back(x, y, z);
  }
  return cloud;
}

// --- Skeleton streams ---

namespace {

json triad_to_json(const AxisTriad& t) {
  return json{{"x", vec3_to_json(t.x)}, {"y", vec3_to_json(t.y)}, {"z", vec3_to_json(t.z)}};
}

AxisTriad triad_from_json(const json& j) {
  return {vec3_from_json(j.at("x")), vec3_from_json(j.at("y")), vec3_from_json(j.at("z"))};
}

json joint_to_json(const Joint& jt) {
  return json{{"id", to_string(jt.id)},
              {"pos", vec3_to_json(jt.position)},
              {"axes", triad_to_json(jt.axes)},
              {"conf", to_string(jt.confidence)}};
}

Joint joint_from_json(const json& j) {
  Joint jt;
  jt.id = joint_id_from_string(j.at("id").get<std::string>());
  jt.position = vec3_from_json(j.at("pos"));
  jt.axes = triad_from_json(j.at("axes"));
  jt.confidence = confidence_from_string(j.at("conf").get<std::string>());
  return jt;
}

json skeleton_to_json(const Skeleton& s) {
  json joints = json::array();
  for (const Joint& jt : s.joints) joints.push_back(joint_to_json(jt));
  return json{{"body_id", s.body_id}, {"joints", std::move(joints)}};
}

Skeleton skeleton_from_json(const json& j) {
  Skeleton s;
  s.body_id = j.at("body_id").get<int>();
  for (const json& jj : j.at("joints")) s.joints.push_back(joint_from_json(jj));
  return s;
}

}  // namespace

json frame_to_json(const SkeletonFrame& f) {
  json bodies = json::array();
  for (const Skeleton& s : f.skeletons) bodies.push_back(skeleton_to_json(s));
  return json{{"sensor_id", f.sensor_id}, {"timestamp_us", f.timestamp_us}, {"bodies", std::move(bodies)}};
}

SkeletonFrame frame_from_json(const json& j) {
  SkeletonFrame f;
  f.sensor_id = j.at("sensor_id").get<std::string>();
  f.timestamp_us = j.at("timestamp_us").get<int64_t>();
  for (const json& js : j.at("bodies")) f.skeletons.push_back(skeleton_from_json(js));
  validate(f);
  return f;
}

void write_skeleton_stream(const fs::path& path, const std::vector<SkeletonFrame>& frames) {
  std::string out;
  for (const SkeletonFrame& f : frames) out += frame_to_json(f).dump() + "\n";
  write_text_atomic(path, out);
}

std::vector<SkeletonFrame> read_skeleton_stream(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::vector<SkeletonFrame> frames;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      frames.push_back(frame_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("'" + path.string() + "' line " + std::to_string(line_no) + ": " + e.what());
    }
    if (frames.size() > 1) {
      const auto& prev = frames[frames.size() - 2];
      const auto& cur = frames.back();
      if (cur.sensor_id != prev.sensor_id) {
        throw std::runtime_error("'" + path.string() + "' line " + std::to_string(line_no) +
                                 ": mixed sensor ids in one stream");
      }
      if (cur.timestamp_us < prev.timestamp_us) {
        throw std::runtime_error("'" + path.string() + "' line " + std::to_string(line_no) +
                                 ": timestamps must be non-decreasing");
      }
    }
  }
  return frames;
}

// --- Calibration ---

std::array<double, 16> to_mat4_row_major(const RigidTransform& t) {
  std::array<double, 16> m{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m[r * 4 + c] = t.rotation(r, c);
    m[r * 4 + 3] = t.translation(r);
  }
  m[12] = m[13] = m[14] = 0.0;
  m[15] = 1.0;
  return m;
}

RigidTransform from_mat4_row_major(const std::array<double, 16>& m) {
  if (m[12] != 0.0 || m[13] != 0.0 || m[14] != 0.0 || m[15] != 1.0) {
    throw std::runtime_error("4x4 transform: last row must be exactly 0 0 0 1");
  }
  RigidTransform t;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) t.rotation(r, c) = m[r * 4 + c];
    t.translation(r) = m[r * 4 + 3];
  }
  check_rotation(t.rotation, 1e-6);
  return t;
}

namespace {

json mat4_json(const RigidTransform& t) {
  const auto m = to_mat4_row_major(t);
  return json(m);
}

RigidTransform mat4_from_json(const json& j) {
  if (!j.is_array() || j.size() != 16) throw std::runtime_error("expected a 16-element matrix array");
  std::array<double, 16> m{};
  for (int i = 0; i < 16; ++i) m[i] = j[i].get<double>();
  return from_mat4_row_major(m);
}

}  // namespace

void write_calibration(const fs::path& path, const CalibrationResult& c) {
  json sensors = json::array();
  for (const SensorExtrinsic& s : c.sensors) {
    sensors.push_back({{"sensor_id", s.sensor_id}, {"extrinsic_4x4_row_major", mat4_json(s.extrinsic)}});
  }
  json diags = json::array();
  for (const SensorDiagnostics& d : c.diagnostics) {
    diags.push_back({{"sensor_id", d.sensor_id},
                     {"initial_4x4_row_major", mat4_json(d.initial)},
                     {"icp_rms_m", d.icp_rms},
                     {"icp_iterations", d.icp_iterations},
                     {"icp_converged", d.icp_converged}});
  }
  const json j{{"reference_sensor_id", c.reference_sensor_id},
               {"sensors", std::move(sensors)},
               {"diagnostics", {{"per_sensor", std::move(diags)}}}};
  write_text_atomic(path, j.dump(2) + "\n");
}

CalibrationResult read_calibration(const fs::path& path) {
  const json j = parse_json_file(path);
  CalibrationResult c;
  try {
    c.reference_sensor_id = j.at("reference_sensor_id").get<std::string>();
    for (const json& js : j.at("sensors")) {
      c.sensors.push_back({js.at("sensor_id").get<std::string>(),
                           mat4_from_json(js.at("extrinsic_4x4_row_major"))});
    }
    if (j.contains("diagnostics") && j["diagnostics"].contains("per_sensor")) {
      for (const json& jd : j["diagnostics"]["per_sensor"]) {
        SensorDiagnostics d;
        d.sensor_id = jd.at("sensor_id").get<std::string>();
        d.initial = mat4_from_json(jd.at("initial_4x4_row_major"));
        d.icp_rms = jd.at("icp_rms_m").get<double>();
        d.icp_iterations = jd.at("icp_iterations").get<int>();
        d.icp_converged = jd.at("icp_converged").get<bool>();
        c.diagnostics.push_back(std::move(d));
      }
    }
  } catch (const json::exception& e) {
    throw std::runtime_error("'" + path.string() + "': " + e.what());
  }
  return c;
}

// --- Fused stream ---

json fused_frame_to_json(const FusedFrame& f, const std::string& reference_sensor_id) {
  json persons = json::array();
  for (const FusedPerson& p : f.persons) {
    json prov;
    if (p.provenance.kind == Provenance::Kind::Merged) {
      json contributors = json::array();
      for (const auto& [sensor, body] : p.provenance.contributors) {
        contributors.push_back({{"sensor_id", sensor}, {"body_id", body}});
      }
      prov = json{{"type", "merged"},
                  {"contributors", std::move(contributors)},
                  {"pair_distance_m", p.provenance.pair_distance}};
    } else {
      prov = json{{"type", "isolated"},
                  {"sensor_id", p.provenance.contributors.at(0).first},
                  {"body_id", p.provenance.contributors.at(0).second}};
    }
    json entry = skeleton_to_json(p.skeleton);
    entry["provenance"] = std::move(prov);
    persons.push_back(std::move(entry));
  }
  return json{{"reference_sensor_id", reference_sensor_id},
              {"timestamp_us", f.timestamp_us},
              {"persons", std::move(persons)}};
}

FusedFrame fused_frame_from_json(const json& j, std::string* reference_sensor_id) {
  FusedFrame f;
  f.timestamp_us = j.at("timestamp_us").get<int64_t>();
  if (reference_sensor_id) *reference_sensor_id = j.at("reference_sensor_id").get<std::string>();
  for (const json& jp : j.at("persons")) {
    FusedPerson p;
    p.skeleton = skeleton_from_json(jp);
    const json& prov = jp.at("provenance");
    if (prov.at("type") == "merged") {
      p.provenance.kind = Provenance::Kind::Merged;
      for (const json& jc : prov.at("contributors")) {
        p.provenance.contributors.emplace_back(jc.at("sensor_id").get<std::string>(),
                                               jc.at("body_id").get<int>());
      }
      p.provenance.pair_distance = prov.at("pair_distance_m").get<double>();
    } else if (prov.at("type") == "isolated") {
      p.provenance.kind = Provenance::Kind::Isolated;
      p.provenance.contributors.emplace_back(prov.at("sensor_id").get<std::string>(),
                                             prov.at("body_id").get<int>());
    } else {
      throw std::runtime_error("unknown provenance type");
    }
    f.persons.push_back(std::move(p));
  }
  return f;
}

void write_fused_stream(const fs::path& path, const std::string& reference_sensor_id,
                        const std::vector<FusedFrame>& frames) {
  std::string out;
  for (const FusedFrame& f : frames) out += fused_frame_to_json(f, reference_sensor_id).dump() + "\n";
  write_text_atomic(path, out);
}

std::vector<FusedFrame> read_fused_stream(const fs::path& path, std::string* reference_sensor_id) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::vector<FusedFrame> frames;
  std::string line, ref, first_ref;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      frames.push_back(fused_frame_from_json(json::parse(line), &ref));
    } catch (const std::exception& e) {
      throw std::runtime_error("'" + path.string() + "' line " + std::to_string(line_no) + ": " + e.what());
    }
    if (frames.size() == 1) {
      first_ref = ref;
    } else if (ref != first_ref) {
      throw std::runtime_error("'" + path.string() + "' line " + std::to_string(line_no) +
                               ": reference sensor changed mid-stream");
    }
  }
  if (reference_sensor_id) *reference_sensor_id = first_ref;
  return frames;
}

// --- Scene ---

Scene read_scene(const fs::path& path) {
  const json j = parse_json_file(path);
  Scene s;
  try {
    s.floor = j.value("floor", true);
    if (j.contains("boxes")) {
      for (const json& jb : j["boxes"]) {
        s.boxes.push_back({vec3_from_json(jb.at("min")), vec3_from_json(jb.at("max"))});
      }
    }
    if (j.contains("bodies")) {
      for (const json& jb : j["bodies"]) {
        BodyModel b;
        for (const json& jw : jb.at("waypoints")) {
          b.waypoints.push_back({jw.at("t_us").get<int64_t>(), vec3_from_json(jw.at("pos")),
                                 jw.value("heading_rad", 0.0)});
        }
        if (b.waypoints.empty()) throw std::runtime_error("body without waypoints");
        s.bodies.push_back(std::move(b));
      }
    }
    for (const json& js : j.at("sensors")) {
      SensorModel m;
      m.sensor_id = js.at("sensor_id").get<std::string>();
      const json& ji = js.at("intrinsics");
      m.intrinsics = {ji.at("width").get<int>(), ji.at("height").get<int>(), ji.at("fx").get<double>(),
                      ji.at("fy").get<double>(), ji.at("cx").get<double>(), ji.at("cy").get<double>()};
      validate(m.intrinsics);
      m.extrinsic = mat4_from_json(js.at("extrinsic_4x4_row_major"));
      m.phase_offset_us = js.value("phase_offset_us", int64_t{0});
      m.max_range_m = js.value("max_range_m", 5.0);
      s.sensors.push_back(std::move(m));
    }
    if (j.contains("noise")) {
      const json& jn = j["noise"];
      s.noise.joint_pos_sigma_m = jn.value("joint_pos_sigma_m", 0.0);
      s.noise.axis_sigma_rad = jn.value("axis_sigma_rad", 0.0);
      s.noise.depth_sigma_mm = jn.value("depth_sigma_mm", 0.0);
      s.noise.occluded_confidence =
          confidence_from_string(jn.value("occluded_confidence", std::string("low")));
      s.noise.occlusion_noise_factor = jn.value("occlusion_noise_factor", 3.0);
    }
    s.noise.seed = j.value("seed", uint64_t{0});
    s.duration_s = j.value("duration_s", 1.0);
    s.fps = j.value("fps", 30.0);
    if (j.contains("calibration_times_us")) {
      for (const json& jt : j["calibration_times_us"]) s.calibration_times_us.push_back(jt.get<int64_t>());
    }
  } catch (const json::exception& e) {
    throw std::runtime_error("'" + path.string() + "': " + e.what());
  }
  if (s.sensors.empty()) throw std::runtime_error("'" + path.string() + "': scene has no sensors");
  if (!(s.fps > 0)) throw std::runtime_error("'" + path.string() + "': fps must be positive");
  return s;
}

void write_scene(const fs::path& path, const Scene& s) {
  json j;
  j["floor"] = s.floor;
  j["boxes"] = json::array();
  for (const AabbBox& b : s.boxes) {
    j["boxes"].push_back({{"min", vec3_to_json(b.min)}, {"max", vec3_to_json(b.max)}});
  }
  j["bodies"] = json::array();
  for (const BodyModel& b : s.bodies) {
    json ws = json::array();
    for (const BodyWaypoint& w : b.waypoints) {
      ws.push_back({{"t_us", w.t_us}, {"pos", vec3_to_json(w.position)}, {"heading_rad", w.heading_rad}});
    }
    j["bodies"].push_back({{"waypoints", std::move(ws)}});
  }
  j["sensors"] = json::array();
  for (const SensorModel& m : s.sensors) {
    j["sensors"].push_back({{"sensor_id", m.sensor_id},
                            {"intrinsics",
                             {{"width", m.intrinsics.width},
                              {"height", m.intrinsics.height},
                              {"fx", m.intrinsics.fx},
                              {"fy", m.intrinsics.fy},
                              {"cx", m.intrinsics.cx},
                              {"cy", m.intrinsics.cy}}},
                            {"extrinsic_4x4_row_major", mat4_json(m.extrinsic)},
                            {"phase_offset_us", m.phase_offset_us},
                            {"max_range_m", m.max_range_m}});
  }
  j["noise"] = {{"joint_pos_sigma_m", s.noise.joint_pos_sigma_m},
                {"axis_sigma_rad", s.noise.axis_sigma_rad},
                {"depth_sigma_mm", s.noise.depth_sigma_mm},
                {"occluded_confidence", to_string(s.noise.occluded_confidence)},
                {"occlusion_noise_factor", s.noise.occlusion_noise_factor}};
  j["seed"] = s.noise.seed;
  j["duration_s"] = s.duration_s;
  j["fps"] = s.fps;
  j["calibration_times_us"] = s.calibration_times_us;
  write_text_atomic(path, j.dump(2) + "\n");
}

// --- Ground truth ---

void write_ground_truth(const fs::path& path, const GroundTruth& gt) {
  json j;
  j["seed"] = gt.seed;
  j["body_count"] = gt.body_count;
  j["sensors"] = json::array();
  for (const SensorExtrinsic& s : gt.sensors) {
    j["sensors"].push_back({{"sensor_id", s.sensor_id}, {"extrinsic_4x4_row_major", mat4_json(s.extrinsic)}});
  }
  j["body_ids"] = json::object();
  for (const auto& [sensor, mapping] : gt.body_ids) {
    json entries = json::array();
    for (const auto& [body_id, body_index] : mapping) {
      entries.push_back({{"body_id", body_id}, {"body_index", body_index}});
    }
    j["body_ids"][sensor] = std::move(entries);
  }
  j["frames"] = json::array();
  for (const GroundTruthFrame& f : gt.frames) {
    json bodies = json::array();
    for (const GroundTruthBody& b : f.bodies) {
      json joints = json::array();
      for (const auto& [id, pos] : b.joints) {
        joints.push_back({{"id", to_string(id)}, {"pos", vec3_to_json(pos)}});
      }
      bodies.push_back({{"body_index", b.body_index}, {"joints", std::move(joints)}});
    }
    j["frames"].push_back({{"timestamp_us", f.timestamp_us}, {"bodies", std::move(bodies)}});
  }
  write_text_atomic(path, j.dump() + "\n");
}

GroundTruth read_ground_truth(const fs::path& path) {
  const json j = parse_json_file(path);
  GroundTruth gt;
  try {
    gt.seed = j.at("seed").get<uint64_t>();
    gt.body_count = j.at("body_count").get<int>();
    for (const json& js : j.at("sensors")) {
      gt.sensors.push_back({js.at("sensor_id").get<std::string>(),
                            mat4_from_json(js.at("extrinsic_4x4_row_major"))});
    }
    for (const auto& [sensor, entries] : j.at("body_ids").items()) {
      for (const json& je : entries) {
        gt.body_ids[sensor][je.at("body_id").get<int>()] = je.at("body_index").get<int>();
      }
    }
    for (const json& jf : j.at("frames")) {
      GroundTruthFrame f;
      f.timestamp_us = jf.at("timestamp_us").get<int64_t>();
      for (const json& jb : jf.at("bodies")) {
        GroundTruthBody b;
        b.body_index = jb.at("body_index").get<int>();
        for (const json& jj : jb.at("joints")) {
          b.joints.emplace_back(joint_id_from_string(jj.at("id").get<std::string>()),
                                vec3_from_json(jj.at("pos")));
        }
        f.bodies.push_back(std::move(b));
      }
      gt.frames.push_back(std::move(f));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error("'" + path.string() + "': " + e.what());
  }
  return gt;
}

}  // namespace skelfuse
