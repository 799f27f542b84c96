#include "geomimu/placement.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>

namespace geomimu {

namespace {

constexpr double kDegenerateTangent = 1e-8;

// vertex -> list of (joint, weight) with weight > 0
std::vector<std::vector<std::pair<std::uint32_t, float>>> influences_by_vertex(const BodyModel& body) {
  std::vector<std::vector<std::pair<std::uint32_t, float>>> out(body.vertex_count());
  for (const auto& w : body.skin_weights)
    if (w.weight > 0.0f) out[w.vertex].emplace_back(w.joint, w.weight);
  return out;
}

double summed_segment_weight(const BodyModel& body, std::size_t segment, std::size_t vertex,
                             const std::vector<std::vector<std::pair<std::uint32_t, float>>>& infl) {
  const auto& joints = body.segment_to_joints[segment];
  double sum = 0.0;
  for (const auto& [joint, weight] : infl[vertex])
    if (std::find(joints.begin(), joints.end(), joint) != joints.end()) sum += weight;
  return sum;
}

Vec3 face_area_normal(const BodyModel& body, const std::array<std::uint32_t, 3>& f) {
  const Vec3& a = body.rest_vertices[f[0]];
  const Vec3& b = body.rest_vertices[f[1]];
  const Vec3& c = body.rest_vertices[f[2]];
  Vec3 n = (b - a).cross(c - a);  // 2 × area × unit normal
  return body.winding == Winding::kClockwise ? Vec3(-n) : n;
}

}  // namespace

CandidateSelection select_candidate_vertices(const BodyModel& body) {
  if (body.skin_weights.empty()) throw ValidationError("body model has no skin weights");
  const auto j2s = body.joint_to_segment();
  auto infl = influences_by_vertex(body);

  CandidateSelection out;
  out.per_segment.resize(body.segment_count());
  for (std::size_t v = 0; v < infl.size(); ++v) {
    auto& list = infl[v];
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    const std::size_t top = std::min<std::size_t>(2, list.size());
    for (std::size_t k = 0; k < top; ++k) {
      auto& seg = out.per_segment[static_cast<std::size_t>(j2s[list[k].first])];
      if (seg.empty() || seg.back() != v) seg.push_back(v);
    }
  }
  for (std::size_t s = 0; s < out.per_segment.size(); ++s) {
    if (out.per_segment[s].empty())
      out.warnings.push_back("segment " + body.segment_names[s] +
                             " has no candidate vertices; excluded from placement");
  }
  return out;
}

Vec3 segment_centroid(const BodyModel& body, std::size_t segment,
                      const std::vector<std::size_t>& candidates) {
  if (candidates.empty()) throw ValidationError("segment centroid needs at least one candidate vertex");
  const auto infl = influences_by_vertex(body);
  Vec3 acc = Vec3::Zero();
  double total = 0.0;
  for (auto v : candidates) {
    const double w = summed_segment_weight(body, segment, v, infl);
    acc += w * body.rest_vertices[v];
    total += w;
  }
  if (!(total > 0.0)) {
    acc.setZero();
    for (auto v : candidates) acc += body.rest_vertices[v];
    return acc / static_cast<double>(candidates.size());
  }
  return acc / total;
}

Vec3 anatomical_axis(const BodyModel& body, const std::vector<std::optional<Vec3>>& centroids,
                     std::size_t segment) {
  if (segment >= body.segment_count() || !centroids[segment])
    throw ValidationError("axis undefined: segment has no centroid");
  const Vec3& c = *centroids[segment];

  // Children first, descending level by level past segments without
  // candidates; nearest centroid wins, ties to the lower index.
  std::vector<std::size_t> level = kinematic_neighbors(body, segment).children;
  while (!level.empty()) {
    std::optional<std::size_t> best;
    double best_dist = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> next;
    for (auto child : level) {
      if (centroids[child]) {
        const double d = (*centroids[child] - c).norm();
        if (d < best_dist) {
          best_dist = d;
          best = child;
        }
      }
      const auto grand = kinematic_neighbors(body, child).children;
      next.insert(next.end(), grand.begin(), grand.end());
    }
    if (best) {
      const Vec3 dir = *centroids[*best] - c;
      if (dir.norm() < 1e-12) throw ValidationError("axis undefined: child centroid coincides");
      return dir.normalized();
    }
    std::sort(next.begin(), next.end());
    level = std::move(next);
  }

  for (int p = body.parent_index[segment]; p >= 0; p = body.parent_index[static_cast<std::size_t>(p)]) {
    if (centroids[static_cast<std::size_t>(p)]) {
      const Vec3 dir = c - *centroids[static_cast<std::size_t>(p)];
      if (dir.norm() < 1e-12) throw ValidationError("axis undefined: parent centroid coincides");
      return dir.normalized();
    }
  }
  throw ValidationError("axis undefined");
}

Vec3 vertex_normal(const BodyModel& body, std::size_t vertex) {
  Vec3 acc = Vec3::Zero();
  bool any = false;
  for (const auto& f : body.faces) {
    if (f[0] == vertex || f[1] == vertex || f[2] == vertex) {
      acc += face_area_normal(body, f);
      any = true;
    }
  }
  if (!any) throw ValidationError("no incident faces");
  if (acc.norm() == 0.0) throw ValidationError("incident faces cancel; normal undefined");
  return acc.normalized();
}

std::vector<Vec3> vertex_normals(const BodyModel& body) {
  std::vector<Vec3> acc(body.vertex_count(), Vec3::Zero());
  for (const auto& f : body.faces) {
    const Vec3 n = face_area_normal(body, f);
    for (auto v : f) acc[v] += n;
  }
  for (auto& n : acc)
    if (n.norm() > 0.0) n.normalize();
  return acc;
}

SurfaceFrame surface_frame(const Vec3& normal, const Vec3& axis) {
  if (!(normal.norm() > 0.0)) throw ValidationError("surface normal has zero length");
  const Vec3 n = normal.normalized();
  SurfaceFrame out;

  Vec3 tangent = Vec3::Zero();
  if (axis.norm() > 0.0) {
    const Vec3 u = axis.normalized();
    tangent = u - u.dot(n) * n;
  }
  if (tangent.norm() < kDegenerateTangent) {
    out.degenerate = true;
    for (int i = 0; i < 3; ++i) {
      const Vec3 e = Vec3::Unit(i);
      tangent = e - e.dot(n) * n;
      if (tangent.norm() >= kDegenerateTangent) break;
    }
  }
  tangent.normalize();
  // Second Gram-Schmidt pass: a short projection loses relative accuracy.
  tangent -= tangent.dot(n) * n;
  tangent.normalize();

  out.rotation.col(0) = tangent;
  out.rotation.col(1) = n.cross(tangent);
  out.rotation.col(2) = n;
  return out;
}

Vec3 local_offset(const MotionSequence& motion, const BodyModel& body, std::size_t segment,
                  std::size_t vertex) {
  if (motion.frames == 0) throw ValidationError("motion has no frames");
  const bool stored = motion.has_posed_vertices();
  const SegmentInfluences infl = stored ? SegmentInfluences{} : segment_influences(body, vertex);
  Vec3 acc = Vec3::Zero();
  for (std::size_t f = 0; f < motion.frames; ++f) {
    const Vec3 m = stored ? motion.posed_vertex(f, vertex) : pose_vertex_lbs(body, motion, f, vertex, infl);
    acc += motion.rotation(f, segment).transpose() * (m - motion.position(f, segment));
  }
  return acc / static_cast<double>(motion.frames);
}

std::vector<SegmentSurface> build_segment_surfaces(const BodyModel& body,
                                                   const CandidateSelection& selection) {
  const std::size_t S = body.segment_count();
  std::vector<std::optional<Vec3>> centroids(S);
  for (std::size_t s = 0; s < S; ++s)
    if (!selection.per_segment[s].empty())
      centroids[s] = segment_centroid(body, s, selection.per_segment[s]);

  std::vector<SegmentSurface> out;
  for (std::size_t s = 0; s < S; ++s) {
    if (!centroids[s]) continue;
    SegmentSurface surf;
    surf.segment = s;
    surf.candidate_vertices = selection.per_segment[s];
    surf.centroid = *centroids[s];
    surf.anatomical_axis = anatomical_axis(body, centroids, s);
    out.push_back(std::move(surf));
  }
  return out;
}

std::vector<PlacementCandidate> enumerate_placements(const BodyModel& body,
                                                     const MotionSequence& motion) {
  if (motion.segments != body.segment_count())
    throw ValidationError("motion and body disagree on segment count");
  const auto selection = select_candidate_vertices(body);
  const auto surfaces = build_segment_surfaces(body, selection);
  const auto normals = vertex_normals(body);

  std::vector<std::vector<PlacementCandidate>> per_surface(surfaces.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(surfaces.size()); ++k) {
    try {
      const auto& surf = surfaces[static_cast<std::size_t>(k)];
      auto& out = per_surface[static_cast<std::size_t>(k)];
      out.reserve(surf.candidate_vertices.size());
      for (auto v : surf.candidate_vertices) {
        if (normals[v].norm() == 0.0)
          throw ValidationError("no incident faces for candidate vertex " + std::to_string(v));
        const SurfaceFrame frame = surface_frame(normals[v], surf.anatomical_axis);
        out.push_back({surf.segment, v, frame.rotation, local_offset(motion, body, surf.segment, v),
                       frame.degenerate});
      }
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<PlacementCandidate> out;
  for (auto& part : per_surface) out.insert(out.end(), part.begin(), part.end());
  return out;
}

}  // namespace geomimu
