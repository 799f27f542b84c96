#pragma once

#include "geomimu/common.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geomimu {

using Bytes = std::vector<std::uint8_t>;

/// Little-endian appender shared by the GMC1/GIW1/GPW1/GCB1/GMX1 writers.
class ByteWriter {
 public:
  void magic(std::string_view tag);
  void u32(std::uint32_t v);
  void f32(float v);
  void f32_array(std::span<const float> v);
  void u32_array(std::span<const std::uint32_t> v);
  void raw(std::span<const std::uint8_t> v);
  void raw(std::string_view v);
  /// u32 byte length followed by the compact UTF-8 dump.
  void json_block(const nlohmann::json& j);

  const Bytes& bytes() const { return buf_; }
  Bytes take() { return std::move(buf_); }
  std::size_t size() const { return buf_.size(); }

 private:
  Bytes buf_;
};

/// Bounds-checked little-endian cursor. Every read names the section it
/// belongs to so truncation diagnostics say where the file ended.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  void expect_magic(std::string_view tag);
  std::uint32_t u32(std::string_view what);
  float f32(std::string_view what);
  std::vector<float> f32_array(std::size_t count, std::string_view what);
  std::vector<std::uint32_t> u32_array(std::size_t count, std::string_view what);
  std::span<const std::uint8_t> raw(std::size_t count, std::string_view what);
  nlohmann::json json_block(std::string_view what);

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  void seek(std::size_t pos);

 private:
  void need(std::size_t count, std::string_view what) const;

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

Bytes read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place.
/// Refuses to replace an existing file unless `overwrite` is set.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes, bool overwrite);

}  // namespace geomimu
