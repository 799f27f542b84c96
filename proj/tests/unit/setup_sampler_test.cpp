#include "support.hpp"

#include "geomimu/gpw1.hpp"
#include "geomimu/setup_sampler.hpp"
#include "geomimu/verify/fixtures.hpp"

#include <numbers>
#include <set>

using namespace geomimu;
using namespace geomimu::test;

namespace {

struct Scene {
  BodyModel body = fixtures::tube_chain_body();
  MotionSequence motion = fixtures::fixture_motion(3, 6.0, 60.0);
  CandidatePool pool;
  Scene() { pool = group_candidates(enumerate_placements(body, motion), 3, false); }
};

const Scene& scene() {
  static const Scene s;
  return s;
}

ViewConfig quiet_config(std::size_t frames) {
  ViewConfig cfg;
  cfg.window_frames = frames;
  return cfg;
}

}  // namespace

TEST_SUITE("setup-sampler") {

TEST_CASE("single option is always chosen") {
  Rng rng(1);
  const std::vector<std::size_t> one = {1, 1, 1};
  for (int i = 0; i < 20; ++i)
    for (const auto& c : sample_full_view(one, ViewConfig{}, rng).choices) CHECK(c.option == 0);
}

TEST_CASE("options are uniform") {
  Rng rng(2);
  const std::vector<std::size_t> four = {4};
  std::array<int, 4> hits{};
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++hits[sample_full_view(four, ViewConfig{}, rng).choices[0].option];
  for (int h : hits) CHECK(std::abs(h / double(n) - 0.25) <= 0.02);
}

TEST_CASE("same seed, same view spec") {
  const std::vector<std::size_t> opts = {5, 7, 3};
  Rng a(9), b(9);
  const ViewSpec x = sample_full_view(opts, ViewConfig{}, a);
  const ViewSpec y = sample_full_view(opts, ViewConfig{}, b);
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK(x.choices[s].option == y.choices[s].option);
    CHECK(x.choices[s].mount == y.choices[s].mount);
  }
}

TEST_CASE("rotating a signal") {
  Rng rng(4);
  Signal s(20, 6);
  for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = standard_normal(rng);
  CHECK(rotate_imu_signal(s, Mat3::Identity()) == s);

  Signal unit = Signal::Zero(1, 6);
  unit(0, 0) = 1.0;
  const Signal r = rotate_imu_signal(unit, about_z(std::numbers::pi / 2).toRotationMatrix());
  CHECK(std::abs(r(0, 0)) <= 1e-15);
  CHECK(std::abs(r(0, 1) - 1.0) <= 1e-15);

  const Mat3 d = fixtures::random_rotation(rng);
  const Signal q = rotate_imu_signal(s, d);
  for (Eigen::Index t = 0; t < s.rows(); ++t) {
    CHECK(std::abs(q.row(t).head<3>().norm() - s.row(t).head<3>().norm()) <= 1e-9);
    CHECK(std::abs(q.row(t).tail<3>().norm() - s.row(t).tail<3>().norm()) <= 1e-9);
  }
  CHECK_THROWS_AS(rotate_imu_signal(s, 2.0 * Mat3::Identity()), ValidationError);
}

TEST_CASE("views without degrees of freedom coincide") {
  CandidatePool single;
  for (const auto& opts : scene().pool) single.push_back({opts.front()});
  ViewConfig cfg = quiet_config(60);
  cfg.in_plane_range = 0.0;
  cfg.tilt_range = 0.0;
  Rng rng(5);
  const ViewPair p = build_paired_views(scene().motion, single, cfg, 30, rng);
  CHECK(p.a.signal == p.b.signal);
  CHECK(p.a.view == ViewId::kA);
  CHECK(p.b.view == ViewId::kB);
}

TEST_CASE("stationary views read gravity only") {
  const MotionSequence still = fixtures::stationary_motion(3, 90, 60.0, 6);
  const auto pool = group_candidates(enumerate_placements(scene().body, still), 3, false);
  Rng rng(7);
  const ViewPair p = build_paired_views(still, pool, quiet_config(60), 10, rng);
  for (const GraphWindow* w : {&p.a, &p.b})
    for (std::size_t t = 0; t < w->frames; ++t)
      for (std::size_t s = 0; s < 3; ++s) {
        CHECK(std::abs(Vec3(w->at(t, s, 0), w->at(t, s, 1), w->at(t, s, 2)).norm() - kStandardGravity) <= 1e-6);
        CHECK(Vec3(w->at(t, s, 3), w->at(t, s, 4), w->at(t, s, 5)).norm() == 0.0);
      }
}

TEST_CASE("paired views are seed-determined") {
  const ViewConfig cfg = quiet_config(60);
  const ViewPair x = build_paired_views_seeded(scene().motion, scene().pool, cfg, 0, 11, 12);
  const ViewPair y = build_paired_views_seeded(scene().motion, scene().pool, cfg, 0, 11, 12);
  const ViewPair z = build_paired_views_seeded(scene().motion, scene().pool, cfg, 0, 12, 13);
  CHECK(x.a.signal == y.a.signal);
  CHECK(x.b.signal == y.b.signal);
  bool differs = false;
  for (std::size_t s = 0; s < 3; ++s)
    differs |= x.spec_a.choices[s].option != z.spec_a.choices[s].option ||
               x.spec_a.choices[s].mount != z.spec_a.choices[s].mount;
  CHECK(differs);
}

TEST_CASE("views cannot run past the motion") {
  Rng rng(1);
  CHECK_THROWS_WITH_AS(build_paired_views(scene().motion, scene().pool, quiet_config(300), 200, rng),
                       "window extends past the motion", ValidationError);
}

TEST_CASE("visibility mask contract") {
  Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    const auto m = sample_visibility_mask(23, rng);
    REQUIRE(!m.empty());
    CHECK(m.size() <= 5);
    CHECK(std::set<std::size_t>(m.begin(), m.end()).size() == m.size());
    CHECK(std::is_sorted(m.begin(), m.end()));
    CHECK(m.back() < 23);
    CHECK(sample_visibility_mask(3, rng).size() <= 3);
  }
  CHECK_THROWS_AS(sample_visibility_mask(0, rng), ValidationError);
  CHECK_THROWS_AS(sample_visibility_mask(5, rng, 4, 2), ValidationError);
}

TEST_CASE("applying masks") {
  Rng rng(3);
  const ViewPair p = build_paired_views(scene().motion, scene().pool, quiet_config(30), 0, rng);
  const std::vector<std::size_t> all = {0, 1, 2};
  const GraphWindow same = apply_mask(p.a, all);
  CHECK(same.signal == p.a.signal);
  CHECK(same.visibility == std::vector<bool>{true, true, true});

  const std::vector<std::size_t> one = {1};
  const GraphWindow masked = apply_mask(p.a, one);
  CHECK(std::count(masked.visibility.begin(), masked.visibility.end(), true) == 1);
  CHECK(masked.visible_segments() == one);
  for (std::size_t t = 0; t < masked.frames; ++t)
    for (std::size_t c = 0; c < 6; ++c) {
      CHECK(masked.at(t, 0, c) == 0.0);
      CHECK(masked.at(t, 1, c) == p.a.at(t, 1, c));
    }
  CHECK(apply_mask(masked, one).signal == masked.signal);
  CHECK_THROWS_AS(apply_mask(p.a, std::vector<std::size_t>{}), ValidationError);
  CHECK_THROWS_AS(apply_mask(p.a, std::vector<std::size_t>{3}), ValidationError);
}

TEST_CASE("window starts") {
  CHECK(window_starts(600, 300, 300) == std::vector<std::size_t>{0, 300});
  CHECK(window_starts(650, 300, 150) == std::vector<std::size_t>{0, 150, 300});
  CHECK(window_starts(100, 300, 300).empty());
  CHECK_THROWS_AS(window_starts(600, 0, 300), ValidationError);
}

TEST_CASE("five seconds at 60 Hz make 300-frame views") {
  const MotionSequence m = fixtures::fixture_motion(3, 6.0, 60.0);
  Rng rng(12);
  const ViewPair p = build_paired_views(m, scene().pool, quiet_config(300), window_starts(m.frames, 300, 300)[0], rng);
  CHECK(p.a.frames == 300);
  CHECK(p.a.signal.size() == 300 * 3 * 6);
}

TEST_CASE("archived views rotate by the mount transpose") {
  const WindowArchive archive = fixtures::fixture_archive(3);
  std::vector<std::vector<const ArchivedWindow*>> options(3);
  for (const auto& w : archive.windows) options[w.segment].push_back(&w);
  ViewSpec spec;
  Rng rng(2);
  for (std::size_t s = 0; s < 3; ++s) spec.choices.push_back({1, fixtures::random_rotation(rng)});
  const GraphWindow v = build_view_from_archive(options, spec, ViewId::kA);
  for (std::size_t s = 0; s < 3; ++s) {
    const Signal expect = rotate_imu_signal(options[s][1]->samples, spec.choices[s].mount.transpose());
    for (std::size_t t = 0; t < v.frames; ++t)
      for (std::size_t c = 0; c < 6; ++c)
        CHECK(v.at(t, s, c) == expect(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)));
  }
}

}
