#pragma once

#include "geomimu/body_model.hpp"
#include "geomimu/verify/fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace geomimu::test {

/// Segments named s0, s1, ... with joint i owned by segment i.
inline BodyModel chain_skeleton(std::vector<int> parents) {
  BodyModel body;
  for (std::size_t s = 0; s < parents.size(); ++s) {
    body.segment_names.push_back("s" + std::to_string(s));
    body.segment_to_joints.push_back({static_cast<std::uint32_t>(s)});
  }
  body.parent_index = std::move(parents);
  return body;
}

inline void add_weight(BodyModel& body, std::uint32_t vertex, std::uint32_t joint, float weight) {
  body.skin_weights.push_back({vertex, joint, weight});
}

/// Motion whose pose at time t = f / rate comes from `pose(s, t)`.
inline MotionSequence motion_from(std::size_t segments, std::size_t frames, double rate,
                                  const std::function<RigidPose(std::size_t, double)>& pose) {
  MotionSequence m;
  m.rate = rate;
  m.frames = frames;
  m.segments = segments;
  for (std::size_t f = 0; f < frames; ++f)
    for (std::size_t s = 0; s < segments; ++s) {
      const RigidPose p = pose(s, static_cast<double>(f) / rate);
      m.positions.push_back(p.position);
      m.orientations.push_back(canonicalize(p.orientation));
    }
  return m;
}

inline MotionSequence identity_motion(std::size_t segments, std::size_t frames, double rate = 60.0) {
  return motion_from(segments, frames, rate, [](std::size_t, double) { return RigidPose{}; });
}

inline Quat about_z(double angle) { return Quat(Eigen::AngleAxisd(angle, Vec3::UnitZ())); }

using fixtures::cube_body;

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace geomimu::test
