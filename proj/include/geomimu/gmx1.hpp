#pragma once

#include "geomimu/binary_io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace geomimu {

/// A list of named dense matrices, e.g. latent sequences or loss inputs.
struct MatrixBundle {
  std::vector<std::string> names;  // empty, or one per matrix
  std::vector<Eigen::MatrixXd> matrices;
};

/// GMX1: "GMX1", u32 header length, JSON header {matrices: [{rows, cols,
/// name?}]}, then each matrix row-major as f32.
Bytes write_matrix_bundle(const MatrixBundle& bundle);
MatrixBundle read_matrix_bundle(std::span<const std::uint8_t> bytes);
MatrixBundle read_matrix_bundle(const std::filesystem::path& path);

}  // namespace geomimu
