#pragma once

#include "geomimu/binary_io.hpp"
#include "geomimu/setup_sampler.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace geomimu {

/// One pre-training tuple: two full views plus their visible sets.
struct PretrainingPair {
  std::string pair_id;
  std::size_t start_frame = 0;
  GraphWindow a;
  GraphWindow b;
  std::vector<std::size_t> visible_a;
  std::vector<std::size_t> visible_b;
};

struct PretrainingShard {
  std::size_t frames = 0;
  std::size_t segments = 0;
  std::vector<std::string> segment_names;
  std::vector<PretrainingPair> pairs;
};

/// GPW1: "GPW1", u32 header length, JSON header {T, S, pair_count, layout
/// "T,S,6", mask_semantics, segment_names}; per pair a u32-prefixed
/// metadata JSON, the A and B visibility bitmaps (S bits each, LSB first,
/// padded to whole bytes) and the two unmasked T×S×6 f32 tensors.
Bytes write_pretraining_shard(const PretrainingShard& shard);
PretrainingShard read_pretraining_shard(std::span<const std::uint8_t> bytes);
PretrainingShard read_pretraining_shard(const std::filesystem::path& path);

/// Atomic write; returns the number of tuples written.
std::size_t export_pretraining_shard(const PretrainingShard& shard, const std::filesystem::path& path,
                                     bool overwrite);

}  // namespace geomimu
