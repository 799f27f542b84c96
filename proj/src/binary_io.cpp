#include "geomimu/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace geomimu {

static_assert(std::endian::native == std::endian::little,
              "container formats are little-endian; big-endian hosts need byte swaps");

void ByteWriter::magic(std::string_view tag) { raw(tag); }

void ByteWriter::u32(std::uint32_t v) {
  std::uint8_t b[4];
  std::memcpy(b, &v, 4);
  buf_.insert(buf_.end(), b, b + 4);
}

void ByteWriter::f32(float v) {
  std::uint8_t b[4];
  std::memcpy(b, &v, 4);
  buf_.insert(buf_.end(), b, b + 4);
}

void ByteWriter::f32_array(std::span<const float> v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
  buf_.insert(buf_.end(), p, p + v.size_bytes());
}

void ByteWriter::u32_array(std::span<const std::uint32_t> v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
  buf_.insert(buf_.end(), p, p + v.size_bytes());
}

void ByteWriter::raw(std::span<const std::uint8_t> v) {
  buf_.insert(buf_.end(), v.begin(), v.end());
}

void ByteWriter::raw(std::string_view v) {
  buf_.insert(buf_.end(), v.begin(), v.end());
}

void ByteWriter::json_block(const nlohmann::json& j) {
  const std::string text = j.dump();
  u32(static_cast<std::uint32_t>(text.size()));
  raw(text);
}

void ByteReader::need(std::size_t count, std::string_view what) const {
  if (count > data_.size() - pos_) {
    throw IoError("truncated section: " + std::string(what));
  }
}

void ByteReader::expect_magic(std::string_view tag) {
  if (data_.size() < tag.size() ||
      std::memcmp(data_.data(), tag.data(), tag.size()) != 0) {
    throw IoError("bad magic: expected " + std::string(tag));
  }
  pos_ = tag.size();
}

std::uint32_t ByteReader::u32(std::string_view what) {
  need(4, what);
  std::uint32_t v;
  std::memcpy(&v, data_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

float ByteReader::f32(std::string_view what) {
  need(4, what);
  float v;
  std::memcpy(&v, data_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

std::vector<float> ByteReader::f32_array(std::size_t count, std::string_view what) {
  if (count > remaining() / 4) throw IoError("truncated section: " + std::string(what));
  std::vector<float> out(count);
  std::memcpy(out.data(), data_.data() + pos_, count * 4);
  pos_ += count * 4;
  return out;
}

std::vector<std::uint32_t> ByteReader::u32_array(std::size_t count,
                                                 std::string_view what) {
  if (count > remaining() / 4) throw IoError("truncated section: " + std::string(what));
  std::vector<std::uint32_t> out(count);
  std::memcpy(out.data(), data_.data() + pos_, count * 4);
  pos_ += count * 4;
  return out;
}

std::span<const std::uint8_t> ByteReader::raw(std::size_t count, std::string_view what) {
  need(count, what);
  auto out = data_.subspan(pos_, count);
  pos_ += count;
  return out;
}

nlohmann::json ByteReader::json_block(std::string_view what) {
  const std::uint32_t len = u32(what);
  auto text = raw(len, what);
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("malformed JSON in " + std::string(what) + ": " + e.what());
  }
}

void ByteReader::seek(std::size_t pos) {
  if (pos > data_.size()) throw IoError("seek past end of data");
  pos_ = pos;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes, bool overwrite) {
  namespace fs = std::filesystem;
  if (!overwrite && fs::exists(path)) {
    throw IoError("refusing to overwrite " + path.string() + " (use --force)");
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename to " + path.string() + " failed: " + ec.message());
}

}  // namespace geomimu
