#include "support.hpp"

#include "geomimu/placement.hpp"

#include <algorithm>
#include <numbers>

using namespace geomimu;
using namespace geomimu::test;

namespace {

bool has(const std::vector<std::size_t>& v, std::size_t x) { return std::find(v.begin(), v.end(), x) != v.end(); }

// Faces oriented so that their normal points away from `inside`.
void add_outward_face(BodyModel& body, std::uint32_t a, std::uint32_t b, std::uint32_t c, const Vec3& inside) {
  const auto& p = body.rest_vertices;
  const Vec3 n = (p[b] - p[a]).cross(p[c] - p[a]);
  if (n.dot(p[a] - inside) < 0) std::swap(b, c);
  body.faces.push_back({a, b, c});
}

}  // namespace

TEST_SUITE("placement") {

TEST_CASE("top-two influence rule") {
  BodyModel body = chain_skeleton({-1, 0, 1});
  body.rest_vertices.assign(2, Vec3::Zero());
  add_weight(body, 0, 0, 0.7f);
  add_weight(body, 0, 1, 0.3f);
  add_weight(body, 1, 0, 0.6f);
  add_weight(body, 1, 1, 0.3f);
  add_weight(body, 1, 2, 0.1f);
  const auto sel = select_candidate_vertices(body);
  CHECK(has(sel.per_segment[0], 0));
  CHECK(has(sel.per_segment[1], 0));
  CHECK(has(sel.per_segment[0], 1));
  CHECK(has(sel.per_segment[1], 1));
  CHECK_FALSE(has(sel.per_segment[2], 1));
  CHECK(sel.per_segment[2].empty());
}

TEST_CASE("segment centroid is the skinning-weighted mean") {
  BodyModel body = chain_skeleton({-1, 0});
  body.rest_vertices = {{0, 0, 0}, {2, 0, 0}, {5, 5, 5}};
  add_weight(body, 0, 0, 0.5f);
  add_weight(body, 0, 1, 0.5f);
  add_weight(body, 1, 0, 0.5f);
  add_weight(body, 1, 1, 0.5f);
  add_weight(body, 2, 1, 1.0f);
  CHECK((segment_centroid(body, 0, {0, 1}) - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK(segment_centroid(body, 1, {2}) == Vec3(5, 5, 5));

  body.skin_weights.clear();
  add_weight(body, 0, 0, 0.75f);
  add_weight(body, 0, 1, 0.25f);
  add_weight(body, 1, 0, 0.25f);
  add_weight(body, 1, 1, 0.75f);
  CHECK((segment_centroid(body, 0, {0, 1}) - Vec3(0.5, 0, 0)).norm() < 1e-12);
  CHECK_THROWS_AS(segment_centroid(body, 0, {}), ValidationError);
}

TEST_CASE("anatomical axis of a two-link chain") {
  const BodyModel body = chain_skeleton({-1, 0});
  const std::vector<std::optional<Vec3>> c = {Vec3(0, 0, 0), Vec3(0, 0, 1)};
  CHECK((anatomical_axis(body, c, 0) - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK((anatomical_axis(body, c, 1) - Vec3(0, 0, 1)).norm() < 1e-15);
}

TEST_CASE("anatomical axis points to the nearest child") {
  const BodyModel body = chain_skeleton({-1, 0, 0});
  const std::vector<std::optional<Vec3>> c = {Vec3(0, 0, 0), Vec3(0.5, 0, 0), Vec3(0, 0.2, 0)};
  CHECK((anatomical_axis(body, c, 0) - Vec3(0, 1, 0)).norm() < 1e-15);
  // A child without a centroid is skipped.
  const std::vector<std::optional<Vec3>> partial = {Vec3(0, 0, 0), Vec3(0.5, 0, 0), std::nullopt};
  CHECK((anatomical_axis(body, partial, 0) - Vec3(1, 0, 0)).norm() < 1e-15);
  const std::vector<std::optional<Vec3>> same = {Vec3(0, 0, 0), Vec3(0, 0, 0), std::nullopt};
  CHECK_THROWS_AS(anatomical_axis(body, same, 0), ValidationError);
}

TEST_CASE("vertex normal of a flat patch") {
  BodyModel body = chain_skeleton({-1, 0});
  body.rest_vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  body.faces = {{0, 1, 2}, {0, 2, 3}};
  CHECK((vertex_normal(body, 0) - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK((vertex_normal(body, 2) - Vec3(0, 0, 1)).norm() < 1e-15);
  body.winding = Winding::kClockwise;
  CHECK((vertex_normal(body, 0) - Vec3(0, 0, -1)).norm() < 1e-15);
}

TEST_CASE("vertex normal of a cube corner") {
  BodyModel body = chain_skeleton({-1, 0});
  // Corner c = 0 with three unit faces, each split along a diagonal through c.
  body.rest_vertices = {{1, 1, 1}, {0, 1, 1}, {0, 0, 1}, {1, 0, 1}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  const Vec3 inside(0.5, 0.5, 0.5);
  add_outward_face(body, 0, 1, 2, inside);
  add_outward_face(body, 0, 2, 3, inside);
  add_outward_face(body, 0, 3, 4, inside);
  add_outward_face(body, 0, 4, 5, inside);
  add_outward_face(body, 0, 5, 6, inside);
  add_outward_face(body, 0, 6, 1, inside);
  CHECK((vertex_normal(body, 0) - Vec3(1, 1, 1).normalized()).norm() <= 1e-9);
}

TEST_CASE("vertex normal on a sphere is radial") {
  BodyModel body = chain_skeleton({-1, 0});
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  for (double a : {-1.0, 1.0})
    for (double b : {-phi, phi}) {
      body.rest_vertices.push_back(Vec3(0, a, b).normalized());
      body.rest_vertices.push_back(Vec3(a, b, 0).normalized());
      body.rest_vertices.push_back(Vec3(b, 0, a).normalized());
    }
  const auto n = static_cast<std::uint32_t>(body.rest_vertices.size());
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      for (std::uint32_t k = j + 1; k < n; ++k) {
        const auto& p = body.rest_vertices;
        const double edge = (p[i] - p[j]).norm();
        if (std::abs((p[j] - p[k]).norm() - edge) < 1e-9 && std::abs((p[i] - p[k]).norm() - edge) < 1e-9 &&
            edge < 1.1)
          add_outward_face(body, i, j, k, Vec3::Zero());
      }
  REQUIRE(body.faces.size() == 20);
  for (std::uint32_t v = 0; v < n; ++v) CHECK((vertex_normal(body, v) - body.rest_vertices[v]).norm() <= 1e-3);
  const auto all = vertex_normals(body);
  for (std::uint32_t v = 0; v < n; ++v) CHECK((all[v] - vertex_normal(body, v)).norm() < 1e-12);
}

TEST_CASE("surface frame from normal and axis") {
  const auto f1 = surface_frame(Vec3(0, 0, 1), Vec3(1, 0, 0));
  CHECK((f1.rotation - Mat3::Identity()).norm() < 1e-15);
  CHECK_FALSE(f1.degenerate);

  const auto f2 = surface_frame(Vec3(0, 0, 1), Vec3(1, 0, 1).normalized());
  CHECK((f2.rotation.col(0) - Vec3(1, 0, 0)).norm() < 1e-15);

  const auto f3 = surface_frame(Vec3(0, 1, 0), Vec3(0, 0, 1));
  CHECK((f3.rotation.col(0) - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK((f3.rotation.col(1) - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK((f3.rotation.col(2) - Vec3(0, 1, 0)).norm() < 1e-15);

  const auto f4 = surface_frame(Vec3(0, 0, 1), Vec3(0, 0, 1));
  CHECK(f4.degenerate);
  CHECK(std::abs(f4.rotation.determinant() - 1.0) < 1e-12);
  CHECK((f4.rotation.transpose() * f4.rotation - Mat3::Identity()).norm() < 1e-12);
  CHECK_THROWS_AS(surface_frame(Vec3::Zero(), Vec3::UnitX()), ValidationError);
}

TEST_CASE("local offset") {
  BodyModel body = chain_skeleton({-1, 0});
  body.rest_vertices = {{1, 0, 0}};
  add_weight(body, 0, 0, 1.0f);
  CHECK((local_offset(identity_motion(2, 5), body, 0, 0) - Vec3(1, 0, 0)).norm() < 1e-15);

  MotionSequence spin = motion_from(2, 61, 60.0, [](std::size_t, double t) {
    return RigidPose{Vec3(0.3, 0, 0), about_z(t * std::numbers::pi / 2)};
  });
  for (std::size_t f = 0; f < spin.frames; ++f) spin.posed_vertices.push_back(spin.rotation(f, 0) * Vec3(1, 0, 0) + spin.position(f, 0));
  for (std::size_t horizon : {3, 10, 61}) {
    MotionSequence part = spin;
    part.frames = horizon;
    part.positions.resize(horizon * 2);
    part.orientations.resize(horizon * 2);
    part.posed_vertices.resize(horizon);
    CHECK((local_offset(part, body, 0, 0) - Vec3(1, 0, 0)).norm() <= 1e-6);
  }

  MotionSequence wobble = identity_motion(2, 40);
  for (std::size_t f = 0; f < wobble.frames; ++f) wobble.posed_vertices.push_back(Vec3(f % 2 ? 1.001 : 0.999, 0, 0));
  CHECK((local_offset(wobble, body, 0, 0) - Vec3(1, 0, 0)).norm() <= 1e-3);
}

TEST_CASE("enumeration on the cube") {
  const BodyModel body = cube_body();
  const MotionSequence m = identity_motion(2, 5);
  const auto c = enumerate_placements(body, m);
  REQUIRE(c.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(c[i].segment == i / 4);
    CHECK(c[i].vertex == i);
    CHECK(std::abs(c[i].surface_frame.determinant() - 1.0) < 1e-12);
  }
  const auto again = enumerate_placements(body, m);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(again[i].surface_frame == c[i].surface_frame);
    CHECK(again[i].offset == c[i].offset);
  }
}

TEST_CASE("enumeration rejects a body without skinning") {
  BodyModel body = cube_body();
  body.skin_weights.clear();
  CHECK_THROWS_AS(enumerate_placements(body, identity_motion(2, 5)), ValidationError);
}

}
