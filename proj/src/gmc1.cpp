#include "geomimu/gmc1.hpp"

#include <algorithm>
#include <map>

namespace geomimu {

namespace {

using nlohmann::json;

constexpr int kVersion = 1;

struct Section {
  std::size_t offset = 0;
  std::size_t length = 0;
};

template <class T>
T header_field(const json& header, const char* key) {
  if (!header.contains(key)) throw IoError(std::string("GMC1 header missing field: ") + key);
  try {
    return header.at(key).get<T>();
  } catch (const json::exception&) {
    throw IoError(std::string("GMC1 header field has wrong type: ") + key);
  }
}

std::vector<float> to_f32(const std::vector<Vec3>& v) {
  std::vector<float> out;
  out.reserve(v.size() * 3);
  for (const auto& p : v)
    for (int i = 0; i < 3; ++i) out.push_back(static_cast<float>(p[i]));
  return out;
}

std::vector<Vec3> to_vec3(const std::vector<float>& v) {
  std::vector<Vec3> out(v.size() / 3);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Vec3(v[3 * i], v[3 * i + 1], v[3 * i + 2]);
  return out;
}

}  // namespace

MotionContainer load_motion_container(std::span<const std::uint8_t> bytes) {
  ByteReader reader(bytes);
  reader.expect_magic("GMC1");
  const json header = reader.json_block("header");
  const std::size_t data_start = reader.position();

  if (header_field<int>(header, "version") != kVersion)
    throw IoError("unsupported GMC1 version");
  const double rate = header_field<double>(header, "rate");
  const auto S = header_field<std::size_t>(header, "S");
  const auto F = header_field<std::size_t>(header, "F");
  const auto V = header_field<std::size_t>(header, "V");

  MotionContainer out;
  BodyModel& body = out.body;
  body.segment_names = header_field<std::vector<std::string>>(header, "segment_names");
  body.parent_index = header_field<std::vector<int>>(header, "parents");
  if (header.contains("segment_to_joints")) {
    body.segment_to_joints = header_field<std::vector<std::vector<std::uint32_t>>>(header, "segment_to_joints");
  } else {
    body.segment_to_joints.resize(S);
    for (std::size_t s = 0; s < S; ++s) body.segment_to_joints[s] = {static_cast<std::uint32_t>(s)};
  }
  const std::string winding = header.value("winding", std::string("ccw"));
  if (winding == "ccw") body.winding = Winding::kCounterClockwise;
  else if (winding == "cw") body.winding = Winding::kClockwise;
  else throw IoError("unknown winding: " + winding);
  if (body.segment_names.size() != S) throw IoError("GMC1 header: segment_names length differs from S");

  std::map<std::string, Section> sections;
  std::size_t data_end = 0;
  for (const auto& entry : header_field<json>(header, "sections")) {
    const auto name = entry.at("name").get<std::string>();
    Section sec{entry.at("offset").get<std::size_t>(), entry.at("length").get<std::size_t>()};
    if (sec.offset > bytes.size() - data_start || sec.length > bytes.size() - data_start - sec.offset)
      throw IoError("truncated section: " + name);
    if (!sections.emplace(name, sec).second) throw IoError("duplicate section: " + name);
    data_end = std::max(data_end, sec.offset + sec.length);
  }
  if (data_start + data_end != bytes.size()) throw IoError("trailing bytes after GMC1 sections");
  static const char* known[] = {"positions", "quaternions", "rest_vertices", "faces",
                                "skin_weights", "posed_vertices", "bind_pose"};
  for (const auto& [name, sec] : sections) {
    bool ok = false;
    for (const char* k : known) ok = ok || name == k;
    if (!ok) throw IoError("unknown GMC1 section: " + name);
  }

  auto read_f32 = [&](const std::string& name, std::size_t count) -> std::optional<std::vector<float>> {
    auto it = sections.find(name);
    if (it == sections.end()) return std::nullopt;
    if (it->second.length != count * 4)
      throw IoError("section " + name + " has " + std::to_string(it->second.length) +
                    " bytes, expected " + std::to_string(count * 4));
    ByteReader r(bytes);
    r.seek(data_start + it->second.offset);
    return r.f32_array(count, name);
  };
  auto section_bytes = [&](const std::string& name) -> std::optional<ByteReader> {
    auto it = sections.find(name);
    if (it == sections.end()) return std::nullopt;
    ByteReader r(bytes.subspan(data_start + it->second.offset, it->second.length));
    return r;
  };

  if (auto rest = read_f32("rest_vertices", V * 3)) body.rest_vertices = to_vec3(*rest);
  else if (V) throw IoError("GMC1 declares V > 0 but has no rest_vertices section");

  if (auto r = section_bytes("faces")) {
    if (r->remaining() % 12) throw IoError("truncated section: faces");
    const std::size_t n = r->remaining() / 12;
    auto idx = r->u32_array(n * 3, "faces");
    body.faces.resize(n);
    for (std::size_t i = 0; i < n; ++i) body.faces[i] = {idx[3 * i], idx[3 * i + 1], idx[3 * i + 2]};
  }
  if (auto r = section_bytes("skin_weights")) {
    if (r->remaining() % 12) throw IoError("truncated section: skin_weights");
    const std::size_t n = r->remaining() / 12;
    body.skin_weights.resize(n);
    for (auto& w : body.skin_weights) {
      w.vertex = r->u32("skin_weights");
      w.joint = r->u32("skin_weights");
      w.weight = r->f32("skin_weights");
    }
  }
  if (auto bind = read_f32("bind_pose", S * 7)) {
    std::vector<RigidPose> poses(S);
    for (std::size_t s = 0; s < S; ++s) {
      const float* p = bind->data() + 7 * s;
      poses[s].position = Vec3(p[0], p[1], p[2]);
      poses[s].orientation = canonicalize(Quat(p[3], p[4], p[5], p[6]));
    }
    body.bind_pose = std::move(poses);
  }
  body.validate();

  if (F > 0) {
    MotionSequence motion;
    motion.rate = rate;
    motion.frames = F;
    motion.segments = S;
    auto pos = read_f32("positions", F * S * 3);
    auto quat = read_f32("quaternions", F * S * 4);
    if (!pos || !quat) throw IoError("GMC1 declares F > 0 but lacks positions or quaternions");
    motion.positions = to_vec3(*pos);
    motion.orientations.resize(F * S);
    for (std::size_t i = 0; i < F * S; ++i) {
      const float* q = quat->data() + 4 * i;
      motion.orientations[i] = canonicalize(Quat(q[0], q[1], q[2], q[3]));
    }
    if (auto posed = read_f32("posed_vertices", F * V * 3)) motion.posed_vertices = to_vec3(*posed);
    motion.validate(1);
    out.motion = std::move(motion);
  }
  return out;
}

MotionContainer load_motion_container(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return load_motion_container(std::span<const std::uint8_t>(bytes));
}

Bytes write_motion_container(const BodyModel& body, const MotionSequence* motion) {
  const std::size_t S = body.segment_count();
  const std::size_t F = motion ? motion->frames : 0;
  const std::size_t V = body.vertex_count();

  ByteWriter data;
  json sections = json::array();
  auto add = [&](const std::string& name, auto&& write) {
    const std::size_t start = data.size();
    write();
    sections.push_back({{"name", name}, {"offset", start}, {"length", data.size() - start}});
  };

  if (motion) {
    if (motion->segments != S) throw ValidationError("motion segment count differs from body");
    add("positions", [&] { data.f32_array(to_f32(motion->positions)); });
    add("quaternions", [&] {
      for (const auto& q : motion->orientations) {
        data.f32(static_cast<float>(q.w()));
        data.f32(static_cast<float>(q.x()));
        data.f32(static_cast<float>(q.y()));
        data.f32(static_cast<float>(q.z()));
      }
    });
  }
  if (V) add("rest_vertices", [&] { data.f32_array(to_f32(body.rest_vertices)); });
  if (!body.faces.empty()) {
    add("faces", [&] {
      for (const auto& f : body.faces)
        for (auto i : f) data.u32(i);
    });
  }
  if (!body.skin_weights.empty()) {
    add("skin_weights", [&] {
      for (const auto& w : body.skin_weights) {
        data.u32(w.vertex);
        data.u32(w.joint);
        data.f32(w.weight);
      }
    });
  }
  if (motion && motion->has_posed_vertices())
    add("posed_vertices", [&] { data.f32_array(to_f32(motion->posed_vertices)); });
  if (body.bind_pose) {
    add("bind_pose", [&] {
      for (const auto& p : *body.bind_pose) {
        for (int i = 0; i < 3; ++i) data.f32(static_cast<float>(p.position[i]));
        data.f32(static_cast<float>(p.orientation.w()));
        data.f32(static_cast<float>(p.orientation.x()));
        data.f32(static_cast<float>(p.orientation.y()));
        data.f32(static_cast<float>(p.orientation.z()));
      }
    });
  }

  json header = {{"format", "GMC1"},
                 {"version", kVersion},
                 {"rate", motion ? motion->rate : 0.0},
                 {"S", S},
                 {"F", F},
                 {"V", V},
                 {"segment_names", body.segment_names},
                 {"parents", body.parent_index},
                 {"segment_to_joints", body.segment_to_joints},
                 {"winding", body.winding == Winding::kClockwise ? "cw" : "ccw"},
                 {"sections", sections}};
  ByteWriter out;
  out.magic("GMC1");
  out.json_block(header);
  out.raw(data.bytes());
  return out.take();
}

}  // namespace geomimu
