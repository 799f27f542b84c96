#include "geomimu/gpw1.hpp"

namespace geomimu {

namespace {

using nlohmann::json;

constexpr int kVersion = 1;

json setups_to_json(const GraphWindow& w) {
  json out = json::array();
  for (const auto& s : w.setups) {
    json mount = json::array();
    for (int c = 0; c < 3; ++c)
      for (int r = 0; r < 3; ++r) mount.push_back(s.mount(r, c));
    out.push_back({{"vertex", s.vertex}, {"mount", mount}});
  }
  return out;
}

void setups_from_json(const json& j, GraphWindow& w) {
  if (!j.is_array() || j.size() != w.segments) throw IoError("GPW1 setups do not cover every segment");
  for (std::size_t s = 0; s < w.segments; ++s) {
    w.setups[s].vertex = j[s].at("vertex").get<std::size_t>();
    const auto& m = j[s].at("mount");
    if (m.size() != 9) throw IoError("GPW1 mount must hold 9 numbers");
    for (int c = 0; c < 3; ++c)
      for (int r = 0; r < 3; ++r) w.setups[s].mount(r, c) = m[static_cast<std::size_t>(3 * c + r)].get<double>();
  }
}

void write_bitmap(ByteWriter& out, std::size_t segments, const std::vector<std::size_t>& visible) {
  std::vector<std::uint8_t> bits((segments + 7) / 8, 0);
  for (auto s : visible) {
    if (s >= segments) throw ValidationError("visible segment out of range");
    bits[s / 8] |= static_cast<std::uint8_t>(1u << (s % 8));
  }
  out.raw(bits);
}

std::vector<std::size_t> read_bitmap(ByteReader& in, std::size_t segments) {
  auto bits = in.raw((segments + 7) / 8, "visibility bitmap");
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < segments; ++s)
    if (bits[s / 8] & (1u << (s % 8))) out.push_back(s);
  return out;
}

void write_tensor(ByteWriter& out, const GraphWindow& w) {
  for (double v : w.signal) out.f32(static_cast<float>(v));
}

void read_tensor(ByteReader& in, GraphWindow& w) {
  const auto values = in.f32_array(w.signal.size(), "view tensor");
  for (std::size_t i = 0; i < values.size(); ++i) w.signal[i] = values[i];
}

}  // namespace

Bytes write_pretraining_shard(const PretrainingShard& shard) {
  ByteWriter out;
  out.magic("GPW1");
  out.json_block({{"format", "GPW1"},
                  {"version", kVersion},
                  {"T", shard.frames},
                  {"S", shard.segments},
                  {"pair_count", shard.pairs.size()},
                  {"layout", "T,S,6"},
                  {"channels", {"ax", "ay", "az", "gx", "gy", "gz"}},
                  {"mask_semantics",
                   "bit s of a view's bitmap set = segment s visible; tensors are stored "
                   "unmasked, consumers zero-fill or substitute a mask token for hidden segments"},
                  {"segment_names", shard.segment_names}});
  for (const auto& p : shard.pairs) {
    for (const GraphWindow* w : {&p.a, &p.b})
      if (w->frames != shard.frames || w->segments != shard.segments)
        throw ValidationError("view shape differs from shard T×S");
    out.json_block({{"pair_id", p.pair_id},
                    {"start_frame", p.start_frame},
                    {"window_id_a", p.a.window_id},
                    {"window_id_b", p.b.window_id},
                    {"setups_a", setups_to_json(p.a)},
                    {"setups_b", setups_to_json(p.b)}});
    write_bitmap(out, shard.segments, p.visible_a);
    write_bitmap(out, shard.segments, p.visible_b);
    write_tensor(out, p.a);
    write_tensor(out, p.b);
  }
  return out.take();
}

PretrainingShard read_pretraining_shard(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic("GPW1");
  const json header = in.json_block("header");
  if (header.value("version", 0) != kVersion) throw IoError("unsupported GPW1 version");
  if (header.value("layout", std::string()) != "T,S,6") throw IoError("unsupported GPW1 layout");

  PretrainingShard shard;
  shard.frames = header.at("T").get<std::size_t>();
  shard.segments = header.at("S").get<std::size_t>();
  shard.segment_names = header.value("segment_names", std::vector<std::string>{});
  const auto count = header.at("pair_count").get<std::size_t>();
  shard.pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const json meta = in.json_block("pair metadata");
    PretrainingPair p;
    p.a = GraphWindow(shard.frames, shard.segments);
    p.b = GraphWindow(shard.frames, shard.segments);
    p.a.view = ViewId::kA;
    p.b.view = ViewId::kB;
    try {
      p.pair_id = meta.at("pair_id").get<std::string>();
      p.start_frame = meta.at("start_frame").get<std::size_t>();
      p.a.window_id = meta.at("window_id_a").get<std::string>();
      p.b.window_id = meta.at("window_id_b").get<std::string>();
      setups_from_json(meta.at("setups_a"), p.a);
      setups_from_json(meta.at("setups_b"), p.b);
    } catch (const json::exception& e) {
      throw IoError(std::string("malformed GPW1 pair metadata: ") + e.what());
    }
    p.visible_a = read_bitmap(in, shard.segments);
    p.visible_b = read_bitmap(in, shard.segments);
    read_tensor(in, p.a);
    read_tensor(in, p.b);
    shard.pairs.push_back(std::move(p));
  }
  if (in.remaining() != 0) throw IoError("trailing bytes after GPW1 records");
  return shard;
}

PretrainingShard read_pretraining_shard(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return read_pretraining_shard(std::span<const std::uint8_t>(bytes));
}

std::size_t export_pretraining_shard(const PretrainingShard& shard, const std::filesystem::path& path,
                                     bool overwrite) {
  const Bytes bytes = write_pretraining_shard(shard);
  write_file_atomic(path, bytes, overwrite);
  return shard.pairs.size();
}

}  // namespace geomimu
