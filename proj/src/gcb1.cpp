#include "geomimu/gcb1.hpp"

namespace geomimu {

namespace {
constexpr int kVersion = 1;
}

Bytes write_codebooks(const Codebooks& books) {
  books.validate();
  ByteWriter out;
  out.magic("GCB1");
  out.json_block({{"format", "GCB1"},
                  {"version", kVersion},
                  {"P", books.P},
                  {"K", books.K},
                  {"dim", books.dim},
                  {"decay", books.decay},
                  {"seed", books.seed},
                  {"training", books.training_summary}});
  for (const auto& codes : books.codes)
    for (Eigen::Index k = 0; k < codes.rows(); ++k)
      for (Eigen::Index c = 0; c < codes.cols(); ++c) out.f32(static_cast<float>(codes(k, c)));
  return out.take();
}

Codebooks read_codebooks(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic("GCB1");
  const auto header = in.json_block("header");
  if (header.value("version", 0) != kVersion) throw IoError("unsupported GCB1 version");
  Codebooks books;
  try {
    books = Codebooks(header.at("P").get<std::size_t>(), header.at("K").get<std::size_t>(),
                      header.at("dim").get<std::size_t>(), header.at("decay").get<double>());
    books.seed = header.value("seed", std::uint64_t{0});
    books.training_summary = header.value("training", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed GCB1 header: ") + e.what());
  } catch (const ValidationError& e) {
    throw IoError(std::string("invalid GCB1 header: ") + e.what());
  }
  for (auto& codes : books.codes) {
    const auto values = in.f32_array(static_cast<std::size_t>(codes.size()), "codes");
    std::size_t i = 0;
    for (Eigen::Index k = 0; k < codes.rows(); ++k)
      for (Eigen::Index c = 0; c < codes.cols(); ++c) codes(k, c) = values[i++];
  }
  if (in.remaining() != 0) throw IoError("trailing bytes after GCB1 codes");
  books.validate();
  return books;
}

Codebooks read_codebooks(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return read_codebooks(std::span<const std::uint8_t>(bytes));
}

}  // namespace geomimu
