#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace geomimu {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// T×6 IMU samples, columns [ax, ay, az, gx, gy, gz].
using Signal = Eigen::Matrix<double, Eigen::Dynamic, 6, Eigen::RowMajor>;

/// T'×d latent sequence.
using Latent = Eigen::MatrixXd;

inline constexpr double kStandardGravity = 9.80665;

/// z-up world, gravity pointing down.
inline Vec3 default_gravity() { return {0.0, 0.0, -kStandardGravity}; }

/// Input violates a documented contract (bad values, shapes, arguments).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem or container-format failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace geomimu
