#pragma once

#include "geomimu/body_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace geomimu {

/// A sensor site on the body surface: segment, template vertex, the
/// [tangent, binormal, normal] frame and the rigid offset in segment frame.
struct PlacementCandidate {
  std::size_t segment = 0;
  std::size_t vertex = 0;
  Mat3 surface_frame = Mat3::Identity();
  Vec3 offset = Vec3::Zero();
  bool degenerate = false;
};

struct SegmentSurface {
  std::size_t segment = 0;
  std::vector<std::size_t> candidate_vertices;
  Vec3 centroid = Vec3::Zero();
  Vec3 anatomical_axis = Vec3::UnitZ();
};

struct CandidateSelection {
  std::vector<std::vector<std::size_t>> per_segment;  // sorted vertex ids
  std::vector<std::string> warnings;
};

/// A vertex joins segment i when one of i's joints is among its two
/// largest nonzero skinning influences.
CandidateSelection select_candidate_vertices(const BodyModel& body);

/// Skinning-weighted mean of the candidate rest vertices.
Vec3 segment_centroid(const BodyModel& body, std::size_t segment,
                      const std::vector<std::size_t>& candidates);

/// Unit axis toward the nearest child centroid, or away from the parent.
/// `centroids[s]` is empty for segments without candidates.
Vec3 anatomical_axis(const BodyModel& body, const std::vector<std::optional<Vec3>>& centroids,
                     std::size_t segment);

/// Area-weighted incident-face normal on the rest mesh.
Vec3 vertex_normal(const BodyModel& body, std::size_t vertex);

/// vertex_normal for every vertex in one pass over the faces; vertices
/// without incident faces get a zero vector.
std::vector<Vec3> vertex_normals(const BodyModel& body);

struct SurfaceFrame {
  Mat3 rotation = Mat3::Identity();  // columns t, b, n
  bool degenerate = false;
};

/// Projects the axis onto the plane of `normal` to get the tangent, then
/// b = n × t. Falls back to the first usable basis vector when the axis is
/// parallel to the normal.
SurfaceFrame surface_frame(const Vec3& normal, const Vec3& axis);

/// Time-averaged segment-frame position of the posed vertex.
Vec3 local_offset(const MotionSequence& motion, const BodyModel& body, std::size_t segment,
                  std::size_t vertex);

/// Segment surfaces with centroids and axes; segments without candidates
/// are omitted.
std::vector<SegmentSurface> build_segment_surfaces(const BodyModel& body,
                                                   const CandidateSelection& selection);

/// One candidate per (segment, candidate vertex), ordered by segment then
/// vertex. Parallel over segments; the merge order is fixed.
std::vector<PlacementCandidate> enumerate_placements(const BodyModel& body,
                                                     const MotionSequence& motion);

}  // namespace geomimu
