#pragma once

#include "geomimu/binary_io.hpp"
#include "geomimu/imu_sim.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace geomimu {

struct ArchivedWindow {
  std::string window_id;
  std::size_t segment = 0;
  std::size_t vertex = 0;
  std::size_t start_frame = 0;
  Mat3 mount_rotation = Mat3::Identity();
  std::optional<std::string> noise_prior_id;
  std::uint64_t seed = 0;
  Signal samples;  // T×6
};

struct WindowArchive {
  double rate = 0.0;
  std::vector<std::string> segment_names;
  std::vector<ArchivedWindow> windows;
};

/// GIW1: "GIW1", u32 header length, JSON header {rate, window_count, T,
/// segment_names, metadata_schema}, then per window a u32 metadata length,
/// the metadata JSON and T×6 f32 samples, row-major. Header T is the
/// common window length, or 0 when lengths vary (each record's metadata
/// carries its own T).
Bytes write_window_archive(const WindowArchive& archive);
WindowArchive read_window_archive(std::span<const std::uint8_t> bytes);
WindowArchive read_window_archive(const std::filesystem::path& path);

}  // namespace geomimu
