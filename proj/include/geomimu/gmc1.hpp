#pragma once

#include "geomimu/binary_io.hpp"
#include "geomimu/body_model.hpp"

#include <filesystem>
#include <optional>

namespace geomimu {

/// Contents of a GMC1 motion container. A body-only file carries F = 0 and
/// no motion.
struct MotionContainer {
  BodyModel body;
  std::optional<MotionSequence> motion;
};

/// GMC1 layout: "GMC1", u32 header length, JSON header, then the sections
/// listed in header["sections"] in order. Section offsets are relative to
/// the first byte after the header. Floats are f32 LE; indices u32 LE.
///
///   positions       F×S×3 f32
///   quaternions     F×S×4 f32 (w,x,y,z)
///   rest_vertices   V×3 f32
///   faces           n×3 u32
///   skin_weights    n×(u32 vertex, u32 joint, f32 weight)
///   posed_vertices  F×V×3 f32
///   bind_pose       S×7 f32 (px,py,pz,qw,qx,qy,qz)
MotionContainer load_motion_container(std::span<const std::uint8_t> bytes);
MotionContainer load_motion_container(const std::filesystem::path& path);

Bytes write_motion_container(const BodyModel& body, const MotionSequence* motion);

}  // namespace geomimu
