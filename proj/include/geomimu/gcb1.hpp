#pragma once

#include "geomimu/binary_io.hpp"
#include "geomimu/tokenizer.hpp"

#include <filesystem>

namespace geomimu {

/// GCB1: "GCB1", u32 header length, JSON header {P, K, dim, decay, seed,
/// training}, then P×K×dim f32 codes. EMA statistics are not stored; a
/// loaded book has zero counts and sums.
Bytes write_codebooks(const Codebooks& books);
Codebooks read_codebooks(std::span<const std::uint8_t> bytes);
Codebooks read_codebooks(const std::filesystem::path& path);

}  // namespace geomimu
