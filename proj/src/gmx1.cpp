#include "geomimu/gmx1.hpp"

namespace geomimu {

namespace {
constexpr int kVersion = 1;
}

Bytes write_matrix_bundle(const MatrixBundle& bundle) {
  if (!bundle.names.empty() && bundle.names.size() != bundle.matrices.size())
    throw ValidationError("matrix names do not match matrix count");
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < bundle.matrices.size(); ++i) {
    nlohmann::json e = {{"rows", bundle.matrices[i].rows()}, {"cols", bundle.matrices[i].cols()}};
    if (!bundle.names.empty()) e["name"] = bundle.names[i];
    entries.push_back(e);
  }
  ByteWriter out;
  out.magic("GMX1");
  out.json_block({{"format", "GMX1"}, {"version", kVersion}, {"matrices", entries}});
  for (const auto& m : bundle.matrices)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) out.f32(static_cast<float>(m(r, c)));
  return out.take();
}

MatrixBundle read_matrix_bundle(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic("GMX1");
  const auto header = in.json_block("header");
  if (header.value("version", 0) != kVersion) throw IoError("unsupported GMX1 version");
  MatrixBundle bundle;
  try {
    for (const auto& e : header.at("matrices")) {
      const auto rows = e.at("rows").get<Eigen::Index>();
      const auto cols = e.at("cols").get<Eigen::Index>();
      if (rows < 0 || cols < 0) throw IoError("negative GMX1 matrix shape");
      if (e.contains("name")) bundle.names.push_back(e["name"].get<std::string>());
      bundle.matrices.emplace_back(rows, cols);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed GMX1 header: ") + e.what());
  }
  if (!bundle.names.empty() && bundle.names.size() != bundle.matrices.size())
    throw IoError("GMX1 names must be given for every matrix or none");
  for (auto& m : bundle.matrices) {
    const auto values = in.f32_array(static_cast<std::size_t>(m.size()), "matrix data");
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = values[i++];
  }
  if (in.remaining() != 0) throw IoError("trailing bytes after GMX1 matrices");
  return bundle;
}

MatrixBundle read_matrix_bundle(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return read_matrix_bundle(std::span<const std::uint8_t>(bytes));
}

}  // namespace geomimu
