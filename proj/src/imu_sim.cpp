#include "geomimu/imu_sim.hpp"

#include <cmath>
#include <numbers>

namespace geomimu {

Mat3 mount_from_angles(const MountAngles& a) {
  const Mat3 rot_n = Eigen::AngleAxisd(a.in_plane, Vec3::UnitZ()).toRotationMatrix();
  const Mat3 rot_t = Eigen::AngleAxisd(a.tilt_t, Vec3::UnitX()).toRotationMatrix();
  const Mat3 rot_b = Eigen::AngleAxisd(a.tilt_b, Vec3::UnitY()).toRotationMatrix();
  return rot_n * rot_t * rot_b;
}

MountAngles sample_mount_angles(Rng& rng, double in_plane_range, double tilt_range) {
  if (in_plane_range < 0.0 || tilt_range < 0.0) throw ValidationError("rotation ranges must be >= 0");
  MountAngles a;
  a.in_plane = uniform(rng, -in_plane_range, in_plane_range);
  a.tilt_t = uniform(rng, -tilt_range, tilt_range);
  a.tilt_b = uniform(rng, -tilt_range, tilt_range);
  return a;
}

Mat3 mounting_rotation(Rng& rng, double in_plane_range, double tilt_range) {
  const MountAngles a = sample_mount_angles(rng, in_plane_range, tilt_range);
  if (a.in_plane == 0.0 && a.tilt_t == 0.0 && a.tilt_b == 0.0) return Mat3::Identity();
  return mount_from_angles(a);
}

SensorTrajectory sensor_trajectory(const MotionSequence& motion, const PlacementCandidate& cand,
                                   const Mat3& mount) {
  if (cand.segment >= motion.segments) throw ValidationError("placement segment not in motion");
  SensorTrajectory traj;
  traj.rate = motion.rate;
  traj.positions.resize(motion.frames);
  traj.orientations.resize(motion.frames);
  const Mat3 local = cand.surface_frame * mount;
  for (std::size_t f = 0; f < motion.frames; ++f) {
    const Mat3 r = motion.rotation(f, cand.segment);
    traj.positions[f] = motion.position(f, cand.segment) + r * cand.offset;
    traj.orientations[f] = r * local;
  }
  return traj;
}

Eigen::MatrixX3d simulate_accelerometer(const SensorTrajectory& traj, const Vec3& gravity) {
  const std::size_t T = traj.size();
  if (T < 3) throw ValidationError("accelerometer synthesis needs at least 3 frames");
  const double rate2 = traj.rate * traj.rate;
  std::vector<Vec3> accel(T);
  for (std::size_t t = 1; t + 1 < T; ++t)
    accel[t] = (traj.positions[t + 1] - 2.0 * traj.positions[t] + traj.positions[t - 1]) * rate2;
  accel[0] = accel[1];
  accel[T - 1] = accel[T - 2];

  Eigen::MatrixX3d out(static_cast<Eigen::Index>(T), 3);
  for (std::size_t t = 0; t < T; ++t)
    out.row(static_cast<Eigen::Index>(t)) = (traj.orientations[t].transpose() * (accel[t] - gravity)).transpose();
  return out;
}

Vec3 log_so3(const Mat3& r) {
  Quat q(r);
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-12) return 2.0 * v / q.w();
  return v * (2.0 * std::atan2(s, q.w()) / s);
}

Eigen::MatrixX3d simulate_gyroscope(const SensorTrajectory& traj) {
  const std::size_t T = traj.size();
  if (T < 3) throw ValidationError("gyroscope synthesis needs at least 3 frames");
  for (std::size_t t = 0; t + 1 < T; ++t) {
    const Vec3 step = log_so3(traj.orientations[t].transpose() * traj.orientations[t + 1]);
    if (step.norm() >= std::numbers::pi - 1e-3) throw ValidationError("angular sampling aliased");
  }
  Eigen::MatrixX3d out(static_cast<Eigen::Index>(T), 3);
  const double half_rate = 0.5 * traj.rate;
  for (std::size_t t = 1; t + 1 < T; ++t) {
    const Mat3 rel = traj.orientations[t - 1].transpose() * traj.orientations[t + 1];
    out.row(static_cast<Eigen::Index>(t)) = (log_so3(rel) * half_rate).transpose();
  }
  out.row(0) = out.row(1);
  out.row(static_cast<Eigen::Index>(T - 1)) = out.row(static_cast<Eigen::Index>(T - 2));
  return out;
}

NoisePrior estimate_noise_prior(const Signal& stream, double rate, const QuietWindowConfig& cfg,
                                std::string source_id) {
  if (!(rate > 0.0)) throw ValidationError("stream rate must be positive");
  const auto n = static_cast<Eigen::Index>(std::lround(cfg.window_seconds * rate));
  const auto stride = std::max<Eigen::Index>(1, std::lround(cfg.stride_seconds * rate));
  if (n < 2) throw ValidationError("quiet window shorter than two samples");
  if (stream.rows() < n) throw ValidationError("stream shorter than one quiet window");

  Eigen::Matrix<double, 1, 6> sq_dev = Eigen::Matrix<double, 1, 6>::Zero();
  Eigen::Matrix<double, 1, 6> mean_sum = Eigen::Matrix<double, 1, 6>::Zero();
  std::size_t quiet = 0;
  double dof = 0.0;
  for (Eigen::Index start = 0; start + n <= stream.rows(); start += stride) {
    const auto block = stream.middleRows(start, n);
    // Shifted by the first sample, so a constant window has exactly zero spread.
    const Eigen::Matrix<double, 1, 6> origin = block.row(0);
    const Eigen::Matrix<double, Eigen::Dynamic, 6> shifted = block.rowwise() - origin;
    const Eigen::Matrix<double, 1, 6> shift_mean = shifted.colwise().mean();
    const Eigen::Matrix<double, 1, 6> mean = origin + shift_mean;
    const Eigen::Matrix<double, 1, 6> ss = (shifted.rowwise() - shift_mean).array().square().colwise().sum();
    const Eigen::Matrix<double, 1, 6> sd = (ss / static_cast<double>(n - 1)).array().sqrt();
    const bool is_quiet = (sd.head<3>().array() < cfg.accel_gate).all() &&
                          (sd.tail<3>().array() < cfg.gyro_gate).all();
    if (!is_quiet) continue;
    ++quiet;
    sq_dev += ss;
    mean_sum += mean;
    dof += static_cast<double>(n - 1);
  }
  if (quiet == 0) throw ValidationError("no quiet segment found");

  NoisePrior prior;
  prior.source_id = std::move(source_id);
  const Eigen::Matrix<double, 1, 6> pooled = (sq_dev / dof).array().sqrt();
  const Eigen::Matrix<double, 1, 6> mean = mean_sum / static_cast<double>(quiet);
  prior.accel_std = pooled.head<3>().transpose();
  prior.gyro_std = pooled.tail<3>().transpose();
  prior.gyro_bias = mean.tail<3>().transpose();
  const Vec3 accel_mean = mean.head<3>().transpose();
  // A resting accelerometer reads gravity; only the residual along the
  // fitted gravity direction is bias. Streams with gravity already removed
  // (mean far below |g|) keep their full mean as bias.
  if (accel_mean.norm() >= 0.5 * cfg.gravity) {
    prior.accel_bias = accel_mean - cfg.gravity * accel_mean.normalized();
  } else {
    prior.accel_bias = accel_mean;
  }
  return prior;
}

ImuWindow apply_noise(const ImuWindow& window, const NoisePrior& prior, Rng& rng) {
  ImuWindow out = window;
  double std_dev[6];
  double bias[6];
  for (int i = 0; i < 3; ++i) {
    std_dev[i] = prior.accel_std[i];
    std_dev[i + 3] = prior.gyro_std[i];
    bias[i] = prior.accel_bias[i];
    bias[i + 3] = prior.gyro_bias[i];
  }
  for (int c = 0; c < 6; ++c)
    if (!std::isfinite(std_dev[c]) || !std::isfinite(bias[c]) || std_dev[c] < 0.0)
      throw ValidationError("noise prior must be finite with non-negative std");
  for (Eigen::Index t = 0; t < out.samples.rows(); ++t) {
    for (int c = 0; c < 6; ++c) {
      double& x = out.samples(t, c);
      if (bias[c] != 0.0) x += bias[c];
      if (std_dev[c] > 0.0) x += std_dev[c] * standard_normal(rng);
    }
  }
  out.noise_prior_id = prior.source_id;
  return out;
}

Signal simulate_signal(const MotionSequence& motion, const PlacementCandidate& cand,
                       const Mat3& mount, const Vec3& gravity) {
  const SensorTrajectory traj = sensor_trajectory(motion, cand, mount);
  const Eigen::MatrixX3d accel = simulate_accelerometer(traj, gravity);
  const Eigen::MatrixX3d gyro = simulate_gyroscope(traj);
  Signal out(accel.rows(), 6);
  out.leftCols<3>() = accel;
  out.rightCols<3>() = gyro;
  return out;
}

ImuWindow simulate_window(const MotionSequence& motion, const PlacementCandidate& cand,
                          const Mat3& mount, const NoisePrior* prior, const Vec3& gravity,
                          std::uint64_t seed) {
  ImuWindow window;
  window.samples = simulate_signal(motion, cand, mount, gravity);
  window.rate = motion.rate;
  window.segment = cand.segment;
  window.vertex = cand.vertex;
  window.mount_rotation = mount;
  window.seed = seed;
  if (prior && !prior->is_zero()) {
    Rng rng(seed);
    window = apply_noise(window, *prior, rng);
  }
  return window;
}

const NoisePrior* assign_noise_prior(const std::vector<NoisePrior>& priors, std::uint64_t run_seed,
                                     std::size_t segment, std::size_t vertex) {
  if (priors.empty()) return nullptr;
  Rng rng(derive_seed(run_seed, {0x6E6F697365ULL, segment, vertex}));
  return &priors[uniform_index(rng, priors.size())];
}

}  // namespace geomimu
