#include "support.hpp"

#include "geomimu/gmc1.hpp"

#include <numbers>

using namespace geomimu;
using namespace geomimu::test;

TEST_SUITE("body-model") {

TEST_CASE("minimal two-segment cube round-trips through GMC1") {
  const BodyModel body = cube_body();
  body.validate();
  const MotionContainer c = load_motion_container(write_motion_container(body, nullptr));
  CHECK(c.body.segment_count() == 2);
  CHECK(c.body.vertex_count() == 8);
  CHECK(c.body.faces.size() == 12);
  CHECK_FALSE(c.motion.has_value());
}

TEST_CASE("parent cycle is rejected") {
  BodyModel body = chain_skeleton({-1, 2, 1});
  body.rest_vertices = {{0, 0, 0}};
  add_weight(body, 0, 0, 1.0f);
  CHECK_THROWS_WITH_AS(body.validate(), "kinematic graph is not a tree", ValidationError);

  BodyModel rootless = chain_skeleton({1, 0});
  rootless.rest_vertices = {{0, 0, 0}};
  add_weight(rootless, 0, 0, 1.0f);
  CHECK_THROWS_AS(rootless.validate(), ValidationError);
}

TEST_CASE("other body invariants") {
  BodyModel body = cube_body();
  body.faces.push_back({0, 1, 8});
  CHECK_THROWS_WITH_AS(body.validate(), "face index out of range", ValidationError);

  body = cube_body();
  body.skin_weights[0].weight = 0.5f;
  CHECK_THROWS_AS(body.validate(), ValidationError);

  body = cube_body();
  body.segment_to_joints[1] = {0};
  CHECK_THROWS_WITH_AS(body.validate(), "joint assigned to more than one segment", ValidationError);
}

TEST_CASE("off-unit quaternions are normalized on load") {
  const BodyModel body = cube_body();
  MotionSequence m = identity_motion(2, 4);
  for (auto& q : m.orientations) q = Quat(1.0001, 0.0, 0.0, 0.0);
  const MotionContainer c = load_motion_container(write_motion_container(body, &m));
  REQUIRE(c.motion.has_value());
  for (const auto& q : c.motion->orientations) CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("canonical quaternions have w >= 0") {
  const Quat q = canonicalize(Quat(-0.5, 0.5, 0.5, 0.5));
  CHECK(q.w() == 0.5);
  CHECK(q.x() == -0.5);
}

TEST_CASE("resample a constant pose") {
  const RigidPose pose{Vec3(0.1, -0.2, 0.3), Quat(Eigen::AngleAxisd(0.4, Vec3(1, 2, 3).normalized()))};
  const MotionSequence m = motion_from(2, 240, 120.0, [&](std::size_t, double) { return pose; });
  const MotionSequence r = resample_motion(m, 60.0);
  CHECK(r.frames == 120);
  CHECK(r.rate == 60.0);
  for (std::size_t f = 0; f < r.frames; ++f) {
    CHECK(r.position(f, 1) == m.position(0, 1));
    CHECK((r.orientation(f, 1).coeffs() - m.orientation(0, 1).coeffs()).norm() < 1e-15);
  }
}

TEST_CASE("resample a linear ramp and a z rotation") {
  const MotionSequence m = motion_from(2, 31, 30.0, [](std::size_t, double t) {
    return RigidPose{Vec3(t, 0, 0), about_z(t * std::numbers::pi / 2)};
  });
  const MotionSequence r = resample_motion(m, 60.0);
  REQUIRE(r.frames == 61);
  CHECK(std::abs(r.position(30, 0).x() - 0.5) <= 1e-9);
  const double angle = r.orientation(30, 0).angularDistance(about_z(std::numbers::pi / 4));
  CHECK(angle <= 1e-6);
  // Odd output frames fall between inputs and are slerped.
  const double mid = r.orientation(1, 0).angularDistance(about_z(std::numbers::pi / 120));
  CHECK(mid <= 1e-9);
}

TEST_CASE("resample is the identity at the same rate and rejects bad input") {
  const MotionSequence m = identity_motion(2, 10, 60.0);
  const MotionSequence r = resample_motion(m, 60.0);
  CHECK(r.positions == m.positions);
  CHECK_THROWS_WITH_AS(resample_motion(identity_motion(2, 1), 30.0), "cannot resample a single frame", ValidationError);
  CHECK_THROWS_AS(resample_motion(m, 0.0), ValidationError);
}

TEST_CASE("slerp is exact at its end points") {
  const Quat a = about_z(0.3), b = Quat(Eigen::AngleAxisd(1.1, Vec3::UnitX()));
  CHECK(slerp_shortest(a, b, 0.0).coeffs() == canonicalize(a).coeffs());
  CHECK(slerp_shortest(a, b, 1.0).coeffs() == canonicalize(b).coeffs());
}

TEST_CASE("identity motion leaves the mesh at rest") {
  const BodyModel body = cube_body();
  const MotionSequence m = motion_from(2, 3, 60.0, [&](std::size_t s, double) { return (*body.bind_pose)[s]; });
  const auto posed = pose_mesh_lbs(body, m, 2);
  for (std::size_t v = 0; v < 8; ++v) CHECK(posed[v] == body.rest_vertices[v]);
}

TEST_CASE("LBS rigid rotation and blended translation") {
  BodyModel body = chain_skeleton({-1, 0});
  body.rest_vertices = {{1, 0, 0}, {0, 0, 0}};
  add_weight(body, 0, 0, 1.0f);
  add_weight(body, 1, 0, 0.5f);
  add_weight(body, 1, 1, 0.5f);
  body.bind_pose = std::vector<RigidPose>(2);

  const MotionSequence rotated = motion_from(2, 1, 60.0, [](std::size_t s, double) {
    return s == 0 ? RigidPose{Vec3::Zero(), about_z(std::numbers::pi / 2)} : RigidPose{};
  });
  CHECK((pose_vertex_lbs(body, rotated, 0, 0) - Vec3(0, 1, 0)).norm() <= 1e-9);

  const MotionSequence lifted = motion_from(2, 1, 60.0, [](std::size_t s, double) {
    return s == 1 ? RigidPose{Vec3(0, 0, 1), Quat::Identity()} : RigidPose{};
  });
  CHECK((pose_vertex_lbs(body, lifted, 0, 1) - Vec3(0, 0, 0.5)).norm() <= 1e-9);
  CHECK_THROWS_AS(pose_vertex_lbs(body, lifted, 1, 1), ValidationError);
}

TEST_CASE("kinematic neighbors") {
  const BodyModel chain = chain_skeleton({-1, 0});
  const auto root = kinematic_neighbors(chain, 0);
  CHECK_FALSE(root.parent.has_value());
  CHECK(root.children == std::vector<std::size_t>{1});
  const auto leaf = kinematic_neighbors(chain, 1);
  CHECK(leaf.parent == 0u);
  CHECK(leaf.children.empty());

  BodyModel nymeria;
  nymeria.segment_names = nymeria_segment_names();
  nymeria.parent_index = nymeria_parent_index();
  REQUIRE(nymeria.segment_count() == 23);
  std::vector<std::string> names;
  for (auto c : kinematic_neighbors(nymeria, static_cast<std::size_t>(segment_index(nymeria, "Pelvis"))).children)
    names.push_back(nymeria.segment_names[c]);
  std::sort(names.begin(), names.end());
  CHECK(names == std::vector<std::string>{"L5", "LeftUpperLeg", "RightUpperLeg"});
}

TEST_CASE("motion validation") {
  MotionSequence m = identity_motion(2, 2);
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = identity_motion(2, 5);
  m.rate = 0.0;
  CHECK_THROWS_WITH_AS(m.validate(), "motion rate must be positive", ValidationError);
}

}
