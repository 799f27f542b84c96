#pragma once

#include "geomimu/body_model.hpp"
#include "geomimu/placement.hpp"
#include "geomimu/random.hpp"

#include <optional>
#include <string>
#include <vector>

namespace geomimu {

struct SensorTrajectory {
  double rate = 0.0;
  std::vector<Vec3> positions;
  std::vector<Mat3> orientations;

  std::size_t size() const { return positions.size(); }
};

struct NoisePrior {
  Vec3 accel_std = Vec3::Zero();
  Vec3 gyro_std = Vec3::Zero();
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
  std::string source_id;

  bool is_zero() const {
    return accel_std.isZero(0) && gyro_std.isZero(0) && accel_bias.isZero(0) && gyro_bias.isZero(0);
  }
};

struct ImuWindow {
  Signal samples;
  double rate = 0.0;
  std::size_t segment = 0;
  std::size_t vertex = 0;
  Mat3 mount_rotation = Mat3::Identity();
  std::optional<std::string> noise_prior_id;
  std::uint64_t seed = 0;
};

struct MountAngles {
  double in_plane = 0.0;  // about n
  double tilt_t = 0.0;    // about t
  double tilt_b = 0.0;    // about b
};

/// Rot_n(θ)·Rot_t(α)·Rot_b(β) in the local (t, b, n) basis.
Mat3 mount_from_angles(const MountAngles& angles);

/// θ ~ U(±in_plane), α, β ~ U(±tilt), drawn in that order.
MountAngles sample_mount_angles(Rng& rng, double in_plane_range, double tilt_range);

Mat3 mounting_rotation(Rng& rng, double in_plane_range, double tilt_range);

/// p_imu = p_i + R_i r;  R_imu = R_i · R_surf · mount.
/// `mount` is expressed in the local sensor basis, so mounting by Δ turns
/// every reading x into Δᵀx.
SensorTrajectory sensor_trajectory(const MotionSequence& motion, const PlacementCandidate& cand,
                                   const Mat3& mount);

/// Specific force in the sensor frame, R(t)ᵀ(p̈(t) − g), with p̈ from
/// second-order central differences replicated at the two boundary frames.
Eigen::MatrixX3d simulate_accelerometer(const SensorTrajectory& traj, const Vec3& gravity);

/// Body-frame angular velocity vee(Log(R(t−1)ᵀR(t+1)))·rate/2.
Eigen::MatrixX3d simulate_gyroscope(const SensorTrajectory& traj);

/// Rotation vector of a rotation matrix (axis × angle).
Vec3 log_so3(const Mat3& r);

struct QuietWindowConfig {
  double gyro_gate = 0.02;   // rad/s, per-axis std
  double accel_gate = 0.05;  // m/s², per-axis std
  double window_seconds = 1.0;
  double stride_seconds = 0.5;
  double gravity = kStandardGravity;
};

/// Bias + white-noise prior from the quiet windows of a real T×6 stream.
NoisePrior estimate_noise_prior(const Signal& stream, double rate, const QuietWindowConfig& cfg,
                                std::string source_id = "");

/// Adds bias and independent Gaussian draws per sample and axis.
ImuWindow apply_noise(const ImuWindow& window, const NoisePrior& prior, Rng& rng);

/// Noise-free 6-channel signal for a placement over the whole motion.
Signal simulate_signal(const MotionSequence& motion, const PlacementCandidate& cand,
                       const Mat3& mount, const Vec3& gravity);

/// Trajectory, accelerometer, gyroscope and noise for one placement. The
/// noise stream is seeded by `seed`.
ImuWindow simulate_window(const MotionSequence& motion, const PlacementCandidate& cand,
                          const Mat3& mount, const NoisePrior* prior, const Vec3& gravity,
                          std::uint64_t seed);

/// Seeded uniform choice among the priors for one placement; null if none.
const NoisePrior* assign_noise_prior(const std::vector<NoisePrior>& priors, std::uint64_t run_seed,
                                     std::size_t segment, std::size_t vertex);

}  // namespace geomimu
