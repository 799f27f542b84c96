#include "geomimu/body_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace geomimu {

std::vector<int> BodyModel::joint_to_segment() const {
  std::uint32_t max_joint = 0;
  for (const auto& joints : segment_to_joints)
    for (auto j : joints) max_joint = std::max(max_joint, j + 1);
  std::vector<int> out(max_joint, -1);
  for (std::size_t s = 0; s < segment_to_joints.size(); ++s)
    for (auto j : segment_to_joints[s]) out[j] = static_cast<int>(s);
  return out;
}

void BodyModel::validate() const {
  const std::size_t S = segment_names.size();
  if (S < 2) throw ValidationError("body model needs at least 2 segments");
  if (parent_index.size() != S) throw ValidationError("parent index count differs from segment count");

  std::size_t roots = 0;
  for (std::size_t s = 0; s < S; ++s) {
    const int p = parent_index[s];
    if (p == -1) {
      ++roots;
    } else if (p < 0 || static_cast<std::size_t>(p) >= S || static_cast<std::size_t>(p) == s) {
      throw ValidationError("kinematic graph is not a tree");
    }
  }
  if (roots != 1) throw ValidationError("kinematic graph is not a tree");
  // Every segment must reach the root within S steps; a cycle never does.
  for (std::size_t s = 0; s < S; ++s) {
    int cur = static_cast<int>(s);
    std::size_t steps = 0;
    while (cur != -1) {
      cur = parent_index[static_cast<std::size_t>(cur)];
      if (++steps > S) throw ValidationError("kinematic graph is not a tree");
    }
  }

  const std::size_t V = rest_vertices.size();
  for (const auto& f : faces)
    for (auto idx : f)
      if (idx >= V) throw ValidationError("face index out of range");

  if (segment_to_joints.size() != S) throw ValidationError("segment_to_joints must list every segment");
  const auto j2s = joint_to_segment();
  {
    std::vector<int> owner(j2s.size(), -1);
    for (std::size_t s = 0; s < S; ++s)
      for (auto j : segment_to_joints[s]) {
        if (owner[j] != -1) throw ValidationError("joint assigned to more than one segment");
        owner[j] = static_cast<int>(s);
      }
  }

  if (!skin_weights.empty()) {
    std::vector<double> sums(V, 0.0);
    for (const auto& w : skin_weights) {
      if (w.vertex >= V) throw ValidationError("skin weight vertex out of range");
      if (w.joint >= j2s.size() || j2s[w.joint] < 0)
        throw ValidationError("skin weight references a joint owned by no segment");
      if (!(w.weight >= 0.0f && w.weight <= 1.0f)) throw ValidationError("skin weight outside [0,1]");
      sums[w.vertex] += w.weight;
    }
    for (std::size_t v = 0; v < V; ++v) {
      if (std::abs(sums[v] - 1.0) > 1e-6) {
        throw ValidationError("skin weights of vertex " + std::to_string(v) +
                              " sum to " + std::to_string(sums[v]) + ", expected 1");
      }
    }
  }

  if (bind_pose && bind_pose->size() != S) throw ValidationError("bind pose must cover every segment");
}

void MotionSequence::validate(std::size_t min_frames) const {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ValidationError("motion rate must be positive");
  if (frames < min_frames)
    throw ValidationError("motion needs at least " + std::to_string(min_frames) + " frames");
  if (positions.size() != frames * segments || orientations.size() != frames * segments)
    throw ValidationError("motion arrays do not match frames × segments");
  for (const auto& q : orientations) {
    if (std::abs(q.norm() - 1.0) > 1e-6) throw ValidationError("orientation quaternion is not unit norm");
  }
  if (!posed_vertices.empty() && posed_vertices.size() % frames != 0)
    throw ValidationError("posed vertices do not divide evenly into frames");
}

Quat canonicalize(const Quat& q, double tolerance) {
  Quat out = q;
  const double n = out.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("degenerate quaternion");
  if (std::abs(n - 1.0) > tolerance) out.coeffs() /= n;
  if (out.w() < 0.0) out.coeffs() = -out.coeffs();
  return out;
}

Quat slerp_shortest(const Quat& a, const Quat& b, double u) {
  if (u == 0.0) return a;
  if (u == 1.0) return b;
  Eigen::Vector4d qa = a.coeffs();
  Eigen::Vector4d qb = b.coeffs();
  double dot = qa.dot(qb);
  if (dot < 0.0) {
    qb = -qb;
    dot = -dot;
  }
  Eigen::Vector4d out;
  if (dot > 1.0 - 1e-12) {
    out = (1.0 - u) * qa + u * qb;
  } else {
    const double theta = std::acos(std::min(1.0, dot));
    const double s = std::sin(theta);
    out = (std::sin((1.0 - u) * theta) / s) * qa + (std::sin(u * theta) / s) * qb;
  }
  Quat q;
  q.coeffs() = out.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

MotionSequence resample_motion(const MotionSequence& motion, double target_rate) {
  if (!(target_rate > 0.0)) throw ValidationError("target rate must be positive");
  if (motion.frames < 2) throw ValidationError("cannot resample a single frame");
  if (target_rate == motion.rate) return motion;

  const double duration = static_cast<double>(motion.frames - 1) / motion.rate;
  const auto out_frames =
      static_cast<std::size_t>(std::floor(duration * target_rate + 1e-9)) + 1;
  const double ratio = motion.rate / target_rate;
  const std::size_t S = motion.segments;
  const std::size_t V = motion.vertex_count();

  MotionSequence out;
  out.rate = target_rate;
  out.frames = out_frames;
  out.segments = S;
  out.positions.resize(out_frames * S);
  out.orientations.resize(out_frames * S);
  if (V) out.posed_vertices.resize(out_frames * V);

  for (std::size_t k = 0; k < out_frames; ++k) {
    const double x = static_cast<double>(k) * ratio;
    std::size_t i = static_cast<std::size_t>(std::floor(x));
    if (i >= motion.frames - 1) i = motion.frames - 2;
    double u = x - static_cast<double>(i);
    if (u > 1.0) u = 1.0;
    for (std::size_t s = 0; s < S; ++s) {
      const Vec3& p0 = motion.position(i, s);
      const Vec3& p1 = motion.position(i + 1, s);
      out.positions[k * S + s] = u == 0.0 ? p0 : Vec3(p0 + u * (p1 - p0));
      out.orientations[k * S + s] =
          slerp_shortest(motion.orientation(i, s), motion.orientation(i + 1, s), u);
    }
    for (std::size_t v = 0; v < V; ++v) {
      const Vec3& m0 = motion.posed_vertex(i, v);
      const Vec3& m1 = motion.posed_vertex(i + 1, v);
      out.posed_vertices[k * V + v] = u == 0.0 ? m0 : Vec3(m0 + u * (m1 - m0));
    }
  }
  return out;
}

RigidPose bind_pose_of(const BodyModel& body, const MotionSequence& motion, std::size_t s) {
  if (body.bind_pose) return (*body.bind_pose)[s];
  return {motion.position(0, s), motion.orientation(0, s)};
}

SegmentInfluences segment_influences(const BodyModel& body, std::size_t vertex) {
  const auto j2s = body.joint_to_segment();
  std::map<std::size_t, double> acc;
  for (const auto& w : body.skin_weights)
    if (w.vertex == vertex && w.weight > 0.0f) acc[static_cast<std::size_t>(j2s[w.joint])] += w.weight;
  return {acc.begin(), acc.end()};
}

Vec3 pose_vertex_lbs(const BodyModel& body, const MotionSequence& motion, std::size_t frame,
                     std::size_t vertex, const SegmentInfluences& influences) {
  if (frame >= motion.frames) throw ValidationError("frame out of range");
  const Vec3& rest = body.rest_vertices[vertex];
  Vec3 out = Vec3::Zero();
  for (const auto& [s, w] : influences) {
    const RigidPose bind = bind_pose_of(body, motion, s);
    const Mat3 r_bind = bind.orientation.normalized().toRotationMatrix();
    const Vec3 local = r_bind.transpose() * (rest - bind.position);
    out += w * (motion.rotation(frame, s) * local + motion.position(frame, s));
  }
  return out;
}

Vec3 pose_vertex_lbs(const BodyModel& body, const MotionSequence& motion,
                     std::size_t frame, std::size_t vertex) {
  if (vertex >= body.vertex_count()) throw ValidationError("vertex out of range");
  return pose_vertex_lbs(body, motion, frame, vertex, segment_influences(body, vertex));
}

std::vector<Vec3> pose_mesh_lbs(const BodyModel& body, const MotionSequence& motion,
                                std::size_t frame) {
  if (frame >= motion.frames) throw ValidationError("frame out of range");
  const auto j2s = body.joint_to_segment();
  std::vector<std::map<std::size_t, double>> acc(body.vertex_count());
  for (const auto& w : body.skin_weights)
    if (w.weight > 0.0f) acc[w.vertex][static_cast<std::size_t>(j2s[w.joint])] += w.weight;
  std::vector<Vec3> out(body.vertex_count());
  for (std::size_t v = 0; v < out.size(); ++v)
    out[v] = pose_vertex_lbs(body, motion, frame, v, SegmentInfluences(acc[v].begin(), acc[v].end()));
  return out;
}

Vec3 posed_vertex(const BodyModel& body, const MotionSequence& motion, std::size_t frame,
                  std::size_t vertex) {
  if (motion.has_posed_vertices()) {
    if (frame >= motion.frames || vertex >= motion.vertex_count())
      throw ValidationError("posed vertex out of range");
    return motion.posed_vertex(frame, vertex);
  }
  return pose_vertex_lbs(body, motion, frame, vertex);
}

KinematicNeighbors kinematic_neighbors(const BodyModel& body, std::size_t segment) {
  if (segment >= body.segment_count()) throw ValidationError("segment out of range");
  KinematicNeighbors out;
  if (body.parent_index[segment] >= 0) out.parent = static_cast<std::size_t>(body.parent_index[segment]);
  for (std::size_t s = 0; s < body.segment_count(); ++s)
    if (body.parent_index[s] == static_cast<int>(segment)) out.children.push_back(s);
  return out;
}

const std::vector<std::string>& nymeria_segment_names() {
  static const std::vector<std::string> names = {
      "Pelvis",        "L5",           "L3",           "T12",
      "T8",            "Neck",         "Head",         "RightShoulder",
      "RightUpperArm", "RightForearm", "RightHand",    "LeftShoulder",
      "LeftUpperArm",  "LeftForearm",  "LeftHand",     "RightUpperLeg",
      "RightLowerLeg", "RightFoot",    "RightToe",     "LeftUpperLeg",
      "LeftLowerLeg",  "LeftFoot",     "LeftToe"};
  return names;
}

const std::vector<int>& nymeria_parent_index() {
  static const std::vector<int> parents = {-1, 0,  1,  2,  3,  4,  5,  4,  7,  8,  9, 4,
                                           11, 12, 13, 0,  15, 16, 17, 0,  19, 20, 21};
  return parents;
}

int segment_index(const BodyModel& body, const std::string& name) {
  auto it = std::find(body.segment_names.begin(), body.segment_names.end(), name);
  return it == body.segment_names.end() ? -1 : static_cast<int>(it - body.segment_names.begin());
}

}  // namespace geomimu
