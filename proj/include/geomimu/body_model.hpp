#pragma once

#include "geomimu/common.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace geomimu {

/// One nonzero skinning influence of a skeleton joint on a template vertex.
struct SkinWeight {
  std::uint32_t vertex = 0;
  std::uint32_t joint = 0;
  float weight = 0.0f;
};

enum class Winding { kCounterClockwise, kClockwise };

struct RigidPose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
};

/// Kinematic tree plus template mesh. Immutable after validation.
struct BodyModel {
  std::vector<std::string> segment_names;
  std::vector<int> parent_index;  // -1 marks the root
  std::vector<Vec3> rest_vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
  std::vector<SkinWeight> skin_weights;
  /// Joint ids owned by each segment. Joint ids index `skin_weights[].joint`.
  std::vector<std::vector<std::uint32_t>> segment_to_joints;
  Winding winding = Winding::kCounterClockwise;
  /// Explicit bind pose per segment; frame 0 of the motion when absent.
  std::optional<std::vector<RigidPose>> bind_pose;

  std::size_t segment_count() const { return segment_names.size(); }
  std::size_t vertex_count() const { return rest_vertices.size(); }

  /// Maps a joint id to its owning segment, or -1.
  std::vector<int> joint_to_segment() const;

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;
};

/// Per-frame segment poses at a fixed rate; optional posed mesh.
struct MotionSequence {
  double rate = 0.0;
  std::size_t frames = 0;
  std::size_t segments = 0;
  std::vector<Vec3> positions;      // frames × segments, row-major
  std::vector<Quat> orientations;   // frames × segments, unit, w >= 0
  std::vector<Vec3> posed_vertices; // frames × V when present, else empty

  const Vec3& position(std::size_t f, std::size_t s) const { return positions[f * segments + s]; }
  const Quat& orientation(std::size_t f, std::size_t s) const {
    return orientations[f * segments + s];
  }
  /// Rotation matrix from the exactly renormalized quaternion.
  Mat3 rotation(std::size_t f, std::size_t s) const {
    return orientations[f * segments + s].normalized().toRotationMatrix();
  }
  bool has_posed_vertices() const { return !posed_vertices.empty(); }
  std::size_t vertex_count() const { return frames ? posed_vertices.size() / frames : 0; }
  const Vec3& posed_vertex(std::size_t f, std::size_t v) const {
    return posed_vertices[f * vertex_count() + v];
  }

  void validate(std::size_t min_frames = 3) const;
};

/// Flips to w >= 0. Renormalizes only when the norm is off by more than
/// `tolerance`, which keeps float-stored unit quaternions bit-stable.
Quat canonicalize(const Quat& q, double tolerance = 1e-6);

/// Shortest-arc spherical interpolation, exact at u = 0 and u = 1.
Quat slerp_shortest(const Quat& a, const Quat& b, double u);

MotionSequence resample_motion(const MotionSequence& motion, double target_rate);

/// Bind pose of segment s: the declared bind pose, or frame 0.
RigidPose bind_pose_of(const BodyModel& body, const MotionSequence& motion, std::size_t s);

/// (segment, summed joint weight) pairs for one vertex, ascending segment.
using SegmentInfluences = std::vector<std::pair<std::size_t, double>>;
SegmentInfluences segment_influences(const BodyModel& body, std::size_t vertex);

/// LBS with precomputed influences, for per-frame loops over one vertex.
Vec3 pose_vertex_lbs(const BodyModel& body, const MotionSequence& motion, std::size_t frame,
                     std::size_t vertex, const SegmentInfluences& influences);

/// Linear-blend-skinned position of one vertex at one frame.
Vec3 pose_vertex_lbs(const BodyModel& body, const MotionSequence& motion,
                     std::size_t frame, std::size_t vertex);

/// All posed vertices at `frame`.
std::vector<Vec3> pose_mesh_lbs(const BodyModel& body, const MotionSequence& motion,
                                std::size_t frame);

/// Stored posed vertex when present, LBS otherwise.
Vec3 posed_vertex(const BodyModel& body, const MotionSequence& motion,
                  std::size_t frame, std::size_t vertex);

struct KinematicNeighbors {
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children;  // ascending
};

KinematicNeighbors kinematic_neighbors(const BodyModel& body, std::size_t segment);

/// The 23-segment Xsens-style tree used by Nymeria: names and parents.
const std::vector<std::string>& nymeria_segment_names();
const std::vector<int>& nymeria_parent_index();
int segment_index(const BodyModel& body, const std::string& name);

}  // namespace geomimu
