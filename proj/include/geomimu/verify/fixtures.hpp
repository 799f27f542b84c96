#pragma once

#include "geomimu/body_model.hpp"
#include "geomimu/giw1.hpp"
#include "geomimu/gpw1.hpp"
#include "geomimu/imu_sim.hpp"
#include "geomimu/random.hpp"
#include "geomimu/tokenizer.hpp"

#include <functional>

namespace geomimu::fixtures {

/// Closed tube along +z split into `segments` unit-length links, one joint
/// per link, blended weights at the link boundaries and capped ends. The
/// bind pose puts link s at (0, 0, s) with identity orientation.
BodyModel tube_chain_body(std::size_t segments = 3, std::size_t ring_vertices = 12,
                          std::size_t rings_per_link = 4, double radius = 0.15);

/// Unit cube split into two segments: the lower four vertices on segment
/// 0, the upper four on segment 1.
BodyModel cube_body();

/// Root pose and per-link relative rotation as functions of time.
struct ChainMotionSpec {
  std::function<Vec3(double)> root_position;
  std::function<Mat3(double)> root_rotation;
  std::function<Mat3(std::size_t, double)> joint_rotation;  // link s relative to s-1
  double link_length = 1.0;
};

/// Forward kinematics of a chain at `rate`.
MotionSequence chain_motion(std::size_t segments, std::size_t frames, double rate, const ChainMotionSpec& spec);

/// The bundled 3-link fixture motion: a translating, swaying chain.
MotionSequence fixture_motion(std::size_t segments = 3, double seconds = 10.0, double rate = 60.0);

/// Every frame equal to one random pose.
MotionSequence stationary_motion(std::size_t segments, std::size_t frames, double rate, std::uint64_t seed);

/// Rigid chain under gravity only: constant orientation, parabolic path.
MotionSequence free_fall_motion(std::size_t segments, std::size_t frames, double rate, const Vec3& gravity,
                                std::uint64_t seed);

/// Fills posed_vertices from the body's skinning.
void attach_posed_vertices(const BodyModel& body, MotionSequence& motion);

/// Uniform over SO(3).
Mat3 random_rotation(Rng& rng);
Vec3 random_unit_vector(Rng& rng);

/// T×6 resting stream: gravity along +z in the accelerometer, plus bias
/// and white noise.
Signal bias_white_stream(std::size_t samples, const NoisePrior& truth, double gravity, Rng& rng);

/// Small archive and shard built from the fixture body and motion.
WindowArchive fixture_archive(std::uint64_t seed);
PretrainingShard fixture_shard(std::uint64_t seed, std::size_t pairs = 2, std::size_t frames = 60);
Codebooks fixture_codebooks(std::uint64_t seed, std::size_t P = 2, std::size_t K = 16, std::size_t dim = 4);

}  // namespace geomimu::fixtures
