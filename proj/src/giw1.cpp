#include "geomimu/giw1.hpp"

namespace geomimu {

namespace {

using nlohmann::json;

constexpr int kVersion = 1;

json mat3_column_major(const Mat3& m) {
  json out = json::array();
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 3; ++r) out.push_back(m(r, c));
  return out;
}

Mat3 mat3_from_column_major(const json& j) {
  if (!j.is_array() || j.size() != 9) throw IoError("mount must hold 9 numbers");
  Mat3 m;
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 3; ++r) m(r, c) = j.at(static_cast<std::size_t>(3 * c + r)).get<double>();
  return m;
}

}  // namespace

Bytes write_window_archive(const WindowArchive& archive) {
  std::size_t common_t = archive.windows.empty() ? 0 : static_cast<std::size_t>(archive.windows[0].samples.rows());
  for (const auto& w : archive.windows)
    if (static_cast<std::size_t>(w.samples.rows()) != common_t) common_t = 0;

  ByteWriter out;
  out.magic("GIW1");
  out.json_block({{"format", "GIW1"},
                  {"version", kVersion},
                  {"rate", archive.rate},
                  {"window_count", archive.windows.size()},
                  {"T", common_t},
                  {"segment_names", archive.segment_names},
                  {"metadata_schema",
                   {{"window_id", "string"},
                    {"segment", "uint"},
                    {"vertex", "uint"},
                    {"start_frame", "uint"},
                    {"T", "uint"},
                    {"mount", "9 floats, column-major"},
                    {"noise_prior_id", "string|null"},
                    {"seed", "uint64"}}},
                  {"channels", {"ax", "ay", "az", "gx", "gy", "gz"}}});
  for (const auto& w : archive.windows) {
    json meta = {{"window_id", w.window_id},
                 {"segment", w.segment},
                 {"vertex", w.vertex},
                 {"start_frame", w.start_frame},
                 {"T", w.samples.rows()},
                 {"mount", mat3_column_major(w.mount_rotation)},
                 {"noise_prior_id", w.noise_prior_id ? json(*w.noise_prior_id) : json(nullptr)},
                 {"seed", w.seed}};
    out.json_block(meta);
    for (Eigen::Index t = 0; t < w.samples.rows(); ++t)
      for (int c = 0; c < 6; ++c) out.f32(static_cast<float>(w.samples(t, c)));
  }
  return out.take();
}

WindowArchive read_window_archive(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic("GIW1");
  const json header = in.json_block("header");
  if (header.value("version", 0) != kVersion) throw IoError("unsupported GIW1 version");

  WindowArchive archive;
  archive.rate = header.at("rate").get<double>();
  archive.segment_names = header.value("segment_names", std::vector<std::string>{});
  const auto count = header.at("window_count").get<std::size_t>();
  const auto common_t = header.at("T").get<std::size_t>();
  archive.windows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const json meta = in.json_block("window metadata");
    ArchivedWindow w;
    try {
      w.window_id = meta.at("window_id").get<std::string>();
      w.segment = meta.at("segment").get<std::size_t>();
      w.vertex = meta.at("vertex").get<std::size_t>();
      w.start_frame = meta.at("start_frame").get<std::size_t>();
      w.mount_rotation = mat3_from_column_major(meta.at("mount"));
      if (!meta.at("noise_prior_id").is_null()) w.noise_prior_id = meta.at("noise_prior_id").get<std::string>();
      w.seed = meta.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw IoError(std::string("malformed GIW1 window metadata: ") + e.what());
    }
    const auto T = meta.at("T").get<std::size_t>();
    if (common_t != 0 && T != common_t) throw IoError("GIW1 window length differs from header T");
    const auto values = in.f32_array(T * 6, "window samples");
    w.samples.resize(static_cast<Eigen::Index>(T), 6);
    for (std::size_t k = 0; k < values.size(); ++k)
      w.samples(static_cast<Eigen::Index>(k / 6), static_cast<Eigen::Index>(k % 6)) = values[k];
    archive.windows.push_back(std::move(w));
  }
  if (in.remaining() != 0) throw IoError("trailing bytes after GIW1 records");
  return archive;
}

WindowArchive read_window_archive(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return read_window_archive(std::span<const std::uint8_t>(bytes));
}

}  // namespace geomimu
