#include "geomimu/verify/fixtures.hpp"

#include "geomimu/placement.hpp"
#include "geomimu/setup_sampler.hpp"

#include <cmath>
#include <numbers>

namespace geomimu::fixtures {

namespace {

Mat3 rot(double angle, const Vec3& axis) { return Eigen::AngleAxisd(angle, axis).toRotationMatrix(); }

void add_weight(BodyModel& body, std::size_t v, std::size_t joint, float w) {
  body.skin_weights.push_back({static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(joint), w});
}

}  // namespace

BodyModel cube_body() {
  BodyModel body;
  body.segment_names = {"lower", "upper"};
  body.parent_index = {-1, 0};
  body.segment_to_joints = {{0}, {1}};
  body.rest_vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  body.faces = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
                {1, 2, 6}, {1, 6, 5}, {2, 3, 7}, {2, 7, 6}, {3, 0, 4}, {3, 4, 7}};
  for (std::uint32_t v = 0; v < 8; ++v) body.skin_weights.push_back({v, v < 4 ? 0u : 1u, 1.0f});
  body.bind_pose = std::vector<RigidPose>{{Vec3(0.5, 0.5, 0.0), Quat::Identity()}, {Vec3(0.5, 0.5, 1.0), Quat::Identity()}};
  return body;
}

BodyModel tube_chain_body(std::size_t segments, std::size_t ring_vertices, std::size_t rings_per_link,
                          double radius) {
  if (segments == 0 || ring_vertices < 3 || rings_per_link < 2) throw ValidationError("bad tube shape");
  BodyModel body;
  for (std::size_t s = 0; s < segments; ++s) {
    body.segment_names.push_back("link" + std::to_string(s));
    body.parent_index.push_back(static_cast<int>(s) - 1);
    body.segment_to_joints.push_back({static_cast<std::uint32_t>(s)});
  }
  std::vector<RigidPose> bind(segments);
  for (std::size_t s = 0; s < segments; ++s) bind[s].position = Vec3(0.0, 0.0, static_cast<double>(s));
  body.bind_pose = bind;

  const std::size_t rings = segments * rings_per_link + 1;
  const auto R = ring_vertices;
  for (std::size_t i = 0; i < rings; ++i) {
    const double z = static_cast<double>(i) / static_cast<double>(rings_per_link);
    for (std::size_t k = 0; k < R; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(R);
      body.rest_vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
    }
  }
  const std::size_t bottom = body.rest_vertices.size();
  body.rest_vertices.emplace_back(0.0, 0.0, 0.0);
  const std::size_t top = body.rest_vertices.size();
  body.rest_vertices.emplace_back(0.0, 0.0, static_cast<double>(segments));

  auto idx = [&](std::size_t i, std::size_t k) { return static_cast<std::uint32_t>(i * R + (k % R)); };
  for (std::size_t i = 0; i + 1 < rings; ++i)
    for (std::size_t k = 0; k < R; ++k) {
      body.faces.push_back({idx(i, k), idx(i, k + 1), idx(i + 1, k + 1)});
      body.faces.push_back({idx(i, k), idx(i + 1, k + 1), idx(i + 1, k)});
    }
  for (std::size_t k = 0; k < R; ++k) {
    body.faces.push_back({static_cast<std::uint32_t>(bottom), idx(0, k + 1), idx(0, k)});
    body.faces.push_back({static_cast<std::uint32_t>(top), idx(rings - 1, k), idx(rings - 1, k + 1)});
  }

  for (std::size_t i = 0; i < rings; ++i) {
    const std::size_t link = std::min(i / rings_per_link, segments - 1);
    const std::size_t q = i - link * rings_per_link;
    for (std::size_t k = 0; k < R; ++k) {
      const std::size_t v = i * R + k;
      if (q == 0 && link > 0) {
        add_weight(body, v, link - 1, 0.5f);
        add_weight(body, v, link, 0.5f);
      } else if (q == 1 && link > 0) {
        add_weight(body, v, link, 0.75f);
        add_weight(body, v, link - 1, 0.25f);
      } else if (q + 1 == rings_per_link && link + 1 < segments) {
        add_weight(body, v, link, 0.75f);
        add_weight(body, v, link + 1, 0.25f);
      } else {
        add_weight(body, v, link, 1.0f);
      }
    }
  }
  add_weight(body, bottom, 0, 1.0f);
  add_weight(body, top, segments - 1, 1.0f);
  body.validate();
  return body;
}

MotionSequence chain_motion(std::size_t segments, std::size_t frames, double rate, const ChainMotionSpec& spec) {
  MotionSequence m;
  m.rate = rate;
  m.frames = frames;
  m.segments = segments;
  m.positions.reserve(frames * segments);
  m.orientations.reserve(frames * segments);
  for (std::size_t f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / rate;
    Mat3 r = spec.root_rotation(t);
    Vec3 p = spec.root_position(t);
    for (std::size_t s = 0; s < segments; ++s) {
      if (s > 0) {
        p = p + r * Vec3(0.0, 0.0, spec.link_length);
        r = r * spec.joint_rotation(s, t);
      }
      m.positions.push_back(p);
      m.orientations.push_back(canonicalize(Quat(r)));
    }
  }
  return m;
}

MotionSequence fixture_motion(std::size_t segments, double seconds, double rate) {
  const double two_pi = 2.0 * std::numbers::pi;
  ChainMotionSpec spec;
  spec.root_position = [=](double t) {
    return Vec3(0.4 * t, 0.1 * std::sin(1.1 * t), 1.0 + 0.05 * std::sin(two_pi * 1.8 * t));
  };
  spec.root_rotation = [=](double t) {
    return Mat3(rot(0.3 * std::sin(0.5 * t), Vec3::UnitZ()) * rot(0.1 * std::sin(two_pi * 0.9 * t), Vec3::UnitX()));
  };
  spec.joint_rotation = [=](std::size_t s, double t) {
    const double k = static_cast<double>(s);
    return Mat3(rot(0.4 * std::sin(two_pi * (0.7 + 0.3 * k) * t + k), Vec3::UnitX()) *
                rot(0.25 * std::sin(two_pi * 0.5 * t + 0.3 * k), Vec3::UnitY()));
  };
  const auto frames = static_cast<std::size_t>(std::llround(seconds * rate));
  return chain_motion(segments, frames, rate, spec);
}

Mat3 random_rotation(Rng& rng) {
  Quat q(standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng));
  q.normalize();
  return q.toRotationMatrix();
}

Vec3 random_unit_vector(Rng& rng) {
  Vec3 v;
  do {
    v = Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

MotionSequence stationary_motion(std::size_t segments, std::size_t frames, double rate, std::uint64_t seed) {
  Rng rng(seed);
  const Mat3 root = random_rotation(rng);
  const Vec3 origin(standard_normal(rng), standard_normal(rng), 1.0 + uniform01(rng));
  std::vector<Mat3> joints(segments);
  for (auto& j : joints) j = rot(uniform(rng, -0.8, 0.8), random_unit_vector(rng));
  ChainMotionSpec spec;
  spec.root_position = [=](double) { return origin; };
  spec.root_rotation = [=](double) { return root; };
  spec.joint_rotation = [=](std::size_t s, double) { return joints[s]; };
  return chain_motion(segments, frames, rate, spec);
}

MotionSequence free_fall_motion(std::size_t segments, std::size_t frames, double rate, const Vec3& gravity,
                                std::uint64_t seed) {
  Rng rng(seed);
  const Mat3 root = random_rotation(rng);
  const Vec3 p0(standard_normal(rng), standard_normal(rng), 2.0);
  const Vec3 v0(standard_normal(rng), standard_normal(rng), 3.0);
  std::vector<Mat3> joints(segments);
  for (auto& j : joints) j = rot(uniform(rng, -0.8, 0.8), random_unit_vector(rng));
  ChainMotionSpec spec;
  spec.root_position = [=](double t) { return Vec3(p0 + v0 * t + 0.5 * gravity * t * t); };
  spec.root_rotation = [=](double) { return root; };
  spec.joint_rotation = [=](std::size_t s, double) { return joints[s]; };
  return chain_motion(segments, frames, rate, spec);
}

void attach_posed_vertices(const BodyModel& body, MotionSequence& motion) {
  motion.posed_vertices.clear();
  motion.posed_vertices.reserve(motion.frames * body.vertex_count());
  for (std::size_t f = 0; f < motion.frames; ++f) {
    const auto mesh = pose_mesh_lbs(body, motion, f);
    motion.posed_vertices.insert(motion.posed_vertices.end(), mesh.begin(), mesh.end());
  }
}

Signal bias_white_stream(std::size_t samples, const NoisePrior& truth, double gravity, Rng& rng) {
  Signal out(static_cast<Eigen::Index>(samples), 6);
  for (Eigen::Index t = 0; t < out.rows(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const double base = c == 2 ? gravity : 0.0;
      out(t, c) = base + truth.accel_bias[c] + truth.accel_std[c] * standard_normal(rng);
      out(t, c + 3) = truth.gyro_bias[c] + truth.gyro_std[c] * standard_normal(rng);
    }
  }
  return out;
}

WindowArchive fixture_archive(std::uint64_t seed) {
  const BodyModel body = tube_chain_body();
  const MotionSequence motion = fixture_motion(3, 4.0, 60.0);
  const auto pool = group_candidates(enumerate_placements(body, motion), body.segment_count(), false);
  NoisePrior prior;
  prior.accel_std = Vec3::Constant(0.02);
  prior.gyro_std = Vec3::Constant(0.004);
  prior.gyro_bias = Vec3(0.001, -0.002, 0.0005);
  prior.source_id = "fixture-prior";

  WindowArchive archive;
  archive.rate = motion.rate;
  archive.segment_names = body.segment_names;
  Rng rng(seed);
  const MotionSlice slice = slice_motion(motion, 60, 180);
  for (std::size_t s = 0; s < pool.size(); ++s) {
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& cand = pool[s][(i * 7) % pool[s].size()];
      const Mat3 mount = mounting_rotation(rng, std::numbers::pi, 10.0 * std::numbers::pi / 180.0);
      const std::uint64_t noise_seed = derive_seed(seed, {s, i});
      const ImuWindow w = simulate_window(slice.motion, cand, mount, i == 0 ? &prior : nullptr,
                                          default_gravity(), noise_seed);
      ArchivedWindow a;
      a.window_id = "w" + std::to_string(s) + "_" + std::to_string(i);
      a.segment = s;
      a.vertex = cand.vertex;
      a.start_frame = 60;
      a.mount_rotation = mount;
      a.noise_prior_id = w.noise_prior_id;
      a.seed = noise_seed;
      a.samples = w.samples.middleRows(static_cast<Eigen::Index>(slice.offset), 120);
      archive.windows.push_back(std::move(a));
    }
  }
  return archive;
}

PretrainingShard fixture_shard(std::uint64_t seed, std::size_t pairs, std::size_t frames) {
  const BodyModel body = tube_chain_body();
  const MotionSequence motion = fixture_motion(3, 4.0, 60.0);
  const auto pool = group_candidates(enumerate_placements(body, motion), body.segment_count(), false);
  ViewConfig cfg;
  cfg.window_frames = frames;
  PretrainingShard shard;
  shard.frames = frames;
  shard.segments = body.segment_count();
  shard.segment_names = body.segment_names;
  Rng rng(seed);
  const auto starts = window_starts(motion.frames, frames, frames);
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::size_t start = starts[i % starts.size()];
    ViewPair vp = build_paired_views(motion, pool, cfg, start, rng);
    PretrainingPair p;
    p.pair_id = "p" + std::to_string(i);
    p.start_frame = start;
    p.a = std::move(vp.a);
    p.b = std::move(vp.b);
    p.a.window_id = p.pair_id + "/A";
    p.b.window_id = p.pair_id + "/B";
    p.visible_a = sample_visibility_mask(shard.segments, rng);
    p.visible_b = sample_visibility_mask(shard.segments, rng);
    shard.pairs.push_back(std::move(p));
  }
  return shard;
}

Codebooks fixture_codebooks(std::uint64_t seed, std::size_t P, std::size_t K, std::size_t dim) {
  Codebooks books(P, K, dim);
  books.seed = seed;
  Rng rng(seed);
  for (auto& c : books.codes)
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = standard_normal(rng);
  books.training_summary = {{"epochs", 0}, {"note", "fixture"}};
  return books;
}

}  // namespace geomimu::fixtures
