#pragma once

#include "geomimu/imu_sim.hpp"
#include "geomimu/tokenizer.hpp"

#include <span>
#include <vector>

namespace geomimu::kernels {

// Hot loops in two builds: an OpenMP version used by the library and a
// plain serial version kept as its reference. Both produce identical bits.

void nearest_codes_serial(const Latent& latent, const Codebooks& books, QuantizeResult& out);
void nearest_codes_parallel(const Latent& latent, const Codebooks& books, QuantizeResult& out);

/// Batch of placements simulated against one motion.
struct SimulationJob {
  const PlacementCandidate* candidate = nullptr;
  Mat3 mount = Mat3::Identity();
  const NoisePrior* prior = nullptr;
  std::uint64_t seed = 0;
};

std::vector<ImuWindow> simulate_batch_serial(const MotionSequence& motion,
                                             std::span<const SimulationJob> jobs, const Vec3& gravity);
std::vector<ImuWindow> simulate_batch_parallel(const MotionSequence& motion,
                                               std::span<const SimulationJob> jobs, const Vec3& gravity);

/// Sets the OpenMP team size; 0 keeps the runtime default.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

}  // namespace geomimu::kernels
