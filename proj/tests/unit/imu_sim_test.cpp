#include "support.hpp"

#include "geomimu/imu_sim.hpp"
#include "geomimu/verify/fixtures.hpp"

#include <numbers>

using namespace geomimu;
using namespace geomimu::test;

namespace {

SensorTrajectory trajectory(std::size_t frames, double rate, const std::function<Vec3(double)>& p,
                            const std::function<Mat3(double)>& r) {
  SensorTrajectory traj;
  traj.rate = rate;
  for (std::size_t f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / rate;
    traj.positions.push_back(p(t));
    traj.orientations.push_back(r(t));
  }
  return traj;
}

Mat3 rot_z(double a) { return about_z(a).toRotationMatrix(); }

NoisePrior prior_with(double accel_std, double gyro_std) {
  NoisePrior p;
  p.accel_std = Vec3::Constant(accel_std);
  p.gyro_std = Vec3::Constant(gyro_std);
  p.source_id = "test";
  return p;
}

Signal white(std::size_t n, double std, const Vec3& accel_mean, std::uint64_t seed) {
  Rng rng(seed);
  Signal s(static_cast<Eigen::Index>(n), 6);
  for (Eigen::Index t = 0; t < s.rows(); ++t)
    for (int c = 0; c < 6; ++c) s(t, c) = (c < 3 ? accel_mean[c] : 0.0) + std * standard_normal(rng);
  return s;
}

}  // namespace

TEST_SUITE("imu-sim") {

TEST_CASE("mounting rotation structure") {
  Rng rng(3);
  CHECK(mounting_rotation(rng, 0.0, 0.0) == Mat3::Identity());
  const Mat3 m = mounting_rotation(rng, std::numbers::pi, 0.0);
  CHECK((m.col(2) - Vec3::UnitZ()).norm() <= 1e-12);
  CHECK((m.row(2).transpose() - Vec3::UnitZ()).norm() <= 1e-12);
  CHECK_THROWS_AS(mounting_rotation(rng, -1.0, 0.0), ValidationError);

  const MountAngles a{0.3, 0.0, 0.0};
  CHECK((mount_from_angles(a) - rot_z(0.3)).norm() < 1e-15);
}

TEST_CASE("mount angle law") {
  Rng rng(17);
  const double tilt = 10.0 * std::numbers::pi / 180.0;
  double mean = 0.0, max_tilt = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const MountAngles a = sample_mount_angles(rng, std::numbers::pi, tilt);
    mean += a.in_plane / n;
    max_tilt = std::max({max_tilt, std::abs(a.tilt_t), std::abs(a.tilt_b)});
    CHECK(std::abs(a.in_plane) <= std::numbers::pi);
  }
  CHECK(std::abs(mean) <= 0.02);
  CHECK(max_tilt <= tilt + 1e-9);
}

TEST_CASE("sensor trajectory") {
  PlacementCandidate c;
  c.segment = 0;
  const MotionSequence still = identity_motion(2, 5);
  const SensorTrajectory t0 = sensor_trajectory(still, c, Mat3::Identity());
  for (std::size_t f = 0; f < t0.size(); ++f) {
    CHECK(t0.positions[f] == Vec3::Zero());
    CHECK(t0.orientations[f] == Mat3::Identity());
  }

  c.offset = Vec3(0, 0, 0.1);
  const MotionSequence walk = motion_from(2, 20, 60.0, [](std::size_t, double t) {
    return RigidPose{Vec3(t, 0, 0), Quat::Identity()};
  });
  const SensorTrajectory t1 = sensor_trajectory(walk, c, Mat3::Identity());
  for (std::size_t f = 0; f < t1.size(); ++f) CHECK((t1.positions[f] - walk.position(f, 0) - Vec3(0, 0, 0.1)).norm() < 1e-15);

  c.offset = Vec3(1, 0, 0);
  const MotionSequence spin = motion_from(2, 120, 60.0, [](std::size_t, double t) {
    return RigidPose{Vec3::Zero(), about_z(2.0 * t)};
  });
  const SensorTrajectory t2 = sensor_trajectory(spin, c, Mat3::Identity());
  for (const auto& p : t2.positions) CHECK(std::abs(p.norm() - 1.0) <= 1e-9);

  c.segment = 5;
  CHECK_THROWS_AS(sensor_trajectory(spin, c, Mat3::Identity()), ValidationError);
}

TEST_CASE("accelerometer at rest and in free fall") {
  const Vec3 g = default_gravity();
  const auto rest = trajectory(10, 60.0, [](double) { return Vec3(1, 2, 3); }, [](double) { return Mat3::Identity(); });
  const auto a = simulate_accelerometer(rest, g);
  for (Eigen::Index t = 0; t < a.rows(); ++t) CHECK((a.row(t).transpose() - Vec3(0, 0, kStandardGravity)).norm() == 0.0);

  const auto fall = trajectory(
      30, 60.0, [&](double t) -> Vec3 { return Vec3(0.5 * t, 0, 10) + 0.5 * t * t * g; }, [](double) { return rot_z(0.7); });
  const auto b = simulate_accelerometer(fall, g);
  for (Eigen::Index t = 1; t + 1 < b.rows(); ++t) CHECK(b.row(t).norm() <= 1e-6);

  SensorTrajectory tiny = rest;
  tiny.positions.resize(2);
  tiny.orientations.resize(2);
  CHECK_THROWS_AS(simulate_accelerometer(tiny, g), ValidationError);
}

TEST_CASE("gyroscope readings") {
  const auto still = trajectory(8, 60.0, [](double) { return Vec3::Zero(); }, [](double) { return rot_z(0.4); });
  const auto w0 = simulate_gyroscope(still);
  CHECK(w0.cwiseAbs().maxCoeff() == 0.0);

  const auto spin = trajectory(60, 60.0, [](double) { return Vec3::Zero(); }, [](double t) { return rot_z(2.0 * t); });
  const auto w1 = simulate_gyroscope(spin);
  for (Eigen::Index t = 1; t + 1 < w1.rows(); ++t) CHECK((w1.row(t).transpose() - Vec3(0, 0, 2)).norm() <= 1e-9);

  const Mat3 tilt = Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitX()).toRotationMatrix();
  const auto rolled =
      trajectory(60, 60.0, [](double) { return Vec3::Zero(); }, [&](double t) { return Mat3(rot_z(2.0 * t) * tilt); });
  const auto w2 = simulate_gyroscope(rolled);
  for (Eigen::Index t = 1; t + 1 < w2.rows(); ++t) CHECK((w2.row(t).transpose() - Vec3(0, 2, 0)).norm() <= 1e-9);

  const auto alias =
      trajectory(10, 60.0, [](double) { return Vec3::Zero(); }, [](double t) { return rot_z(3.1415 * 60.0 * t); });
  CHECK_THROWS_WITH_AS(simulate_gyroscope(alias), "angular sampling aliased", ValidationError);
}

TEST_CASE("noise prior from white noise") {
  const NoisePrior p = estimate_noise_prior(white(600, 0.01, Vec3::Zero(), 5), 60.0, QuietWindowConfig{});
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(p.accel_std[i] - 0.01) <= 0.001);
    CHECK(std::abs(p.gyro_std[i] - 0.01) <= 0.001);
    CHECK(std::abs(p.accel_bias[i]) <= 0.003);
    CHECK(std::abs(p.gyro_bias[i]) <= 0.003);
  }
}

TEST_CASE("noise prior from a constant stream") {
  Signal s(120, 6);
  s.rowwise() = (Eigen::Matrix<double, 1, 6>() << 0.0, 0.0, kStandardGravity + 0.1, 0.01, -0.02, 0.03).finished();
  const NoisePrior p = estimate_noise_prior(s, 60.0, QuietWindowConfig{}, "const");
  CHECK(p.accel_std.norm() == 0.0);
  CHECK(p.gyro_std.norm() == 0.0);
  CHECK((p.accel_bias - Vec3(0, 0, 0.1)).norm() <= 1e-12);
  CHECK((p.gyro_bias - Vec3(0.01, -0.02, 0.03)).norm() <= 1e-15);
  CHECK(p.source_id == "const");
}

TEST_CASE("no quiet window") {
  const Signal vigorous = white(600, 1.0, Vec3::Zero(), 9);
  CHECK_THROWS_WITH_AS(estimate_noise_prior(vigorous, 60.0, QuietWindowConfig{}), "no quiet segment found",
                       ValidationError);
  CHECK_THROWS_AS(estimate_noise_prior(white(30, 0.01, Vec3::Zero(), 1), 60.0, QuietWindowConfig{}), ValidationError);
}

TEST_CASE("apply noise") {
  ImuWindow w;
  w.samples = white(50, 1.0, Vec3::Zero(), 2);
  Rng rng(1);
  CHECK(apply_noise(w, NoisePrior{}, rng).samples == w.samples);

  NoisePrior bias;
  bias.accel_bias = Vec3(0.1, 0, 0);
  const ImuWindow shifted = apply_noise(w, bias, rng);
  for (Eigen::Index t = 0; t < w.samples.rows(); ++t) {
    CHECK(shifted.samples(t, 0) == w.samples(t, 0) + 0.1);
    for (int c = 1; c < 6; ++c) CHECK(shifted.samples(t, c) == w.samples(t, c));
  }

  ImuWindow zeros;
  zeros.samples = Signal::Zero(100000, 6);
  const ImuWindow n = apply_noise(zeros, prior_with(0.05, 0.05), rng);
  for (int c = 0; c < 6; ++c) {
    const auto col = n.samples.col(c);
    const double mean = col.mean();
    const double std = std::sqrt((col.array() - mean).square().mean());
    CHECK(std::abs(std - 0.05) <= 0.05 * 0.02);
  }
  NoisePrior bad = prior_with(-1.0, 0.0);
  CHECK_THROWS_AS(apply_noise(zeros, bad, rng), ValidationError);
}

TEST_CASE("simulated windows") {
  const BodyModel body = fixtures::tube_chain_body();
  const MotionSequence still = fixtures::stationary_motion(3, 30, 60.0, 4);
  PlacementCandidate c;
  c.segment = 1;
  c.offset = Vec3(0.1, 0.0, 0.2);
  const ImuWindow w = simulate_window(still, c, Mat3::Identity(), nullptr, default_gravity(), 0);
  for (Eigen::Index t = 0; t < w.samples.rows(); ++t) {
    CHECK(std::abs(w.samples.row(t).head<3>().norm() - kStandardGravity) <= 1e-9);
    CHECK(w.samples.row(t).tail<3>().norm() == 0.0);
  }

  const MotionSequence moving = fixtures::fixture_motion(3, 2.0, 60.0);
  const NoisePrior prior = prior_with(0.02, 0.003);
  const ImuWindow a = simulate_window(moving, c, Mat3::Identity(), &prior, default_gravity(), 42);
  const ImuWindow b = simulate_window(moving, c, Mat3::Identity(), &prior, default_gravity(), 42);
  CHECK(a.samples == b.samples);
  CHECK(a.noise_prior_id == std::optional<std::string>("test"));

  Rng rng(8);
  const Mat3 delta = fixtures::random_rotation(rng);
  const Signal plain = simulate_signal(moving, c, Mat3::Identity(), default_gravity());
  const Signal mounted = simulate_signal(moving, c, delta, default_gravity());
  for (Eigen::Index t = 0; t < plain.rows(); ++t) {
    CHECK((mounted.row(t).head<3>().transpose() - delta.transpose() * plain.row(t).head<3>().transpose()).norm() <= 1e-9);
    CHECK((mounted.row(t).tail<3>().transpose() - delta.transpose() * plain.row(t).tail<3>().transpose()).norm() <= 1e-9);
  }
}

TEST_CASE("noise prior assignment is seeded and uniform-ish") {
  const std::vector<NoisePrior> priors = {prior_with(0.1, 0.1), prior_with(0.2, 0.2)};
  CHECK(assign_noise_prior({}, 1, 0, 0) == nullptr);
  CHECK(assign_noise_prior(priors, 1, 2, 3) == assign_noise_prior(priors, 1, 2, 3));
  int first = 0;
  for (std::size_t v = 0; v < 1000; ++v) first += assign_noise_prior(priors, 7, 0, v) == &priors[0];
  CHECK(first > 400);
  CHECK(first < 600);
}

}
