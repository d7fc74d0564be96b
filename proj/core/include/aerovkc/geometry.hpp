#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace aerovkc {

using Eigen::Matrix3d;
using Eigen::Vector3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rigid-body transform (rotation in SO(3), translation in metres).
struct RigidTransform {
  Matrix3d rotation = Matrix3d::Identity();
  Vector3d translation = Vector3d::Zero();

  RigidTransform() = default;
  RigidTransform(const Matrix3d& r, const Vector3d& t) : rotation(r), translation(t) {}

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vector3d& t) { return {Matrix3d::Identity(), t}; }
  static RigidTransform from_rotation(const Matrix3d& r) { return {r, Vector3d::Zero()}; }

  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }
  Vector3d operator*(const Vector3d& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    const Matrix3d rt = rotation.transpose();
    return {rt, -rt * translation};
  }

  /// True when rotation is orthonormal with det +1 within `tol`.
  bool is_valid(double tol = 1e-9) const;

  bool operator==(const RigidTransform& o) const {
    return rotation == o.rotation && translation == o.translation;
  }
};

namespace so3 {

Matrix3d skew(const Vector3d& v);
Vector3d vee(const Matrix3d& m);

/// Rodrigues exponential of a rotation vector.
Matrix3d exp(const Vector3d& w);
/// Rotation vector of `r`, angle in [0, pi].
Vector3d log(const Matrix3d& r);
/// Inverse of the right Jacobian of SO(3) at rotation vector `phi`.
Matrix3d right_jacobian_inverse(const Vector3d& phi);

Matrix3d rot_x(double a);
Matrix3d rot_y(double a);
Matrix3d rot_z(double a);
Matrix3d axis_angle(const Vector3d& axis, double angle);

/// Roll-pitch-yaw (extrinsic x-y-z): R = Rz(yaw) * Ry(pitch) * Rx(roll).
Matrix3d from_rpy(const Vector3d& rpy);
/// Canonical roll-pitch-yaw with pitch in [-pi/2, pi/2].
Vector3d to_rpy(const Matrix3d& r);
/// The roll-pitch-yaw triple representing `r` closest to `hint` (both branches, 2*pi wraps).
Vector3d to_rpy_near(const Matrix3d& r, const Vector3d& hint);

/// E(rpy) with omega_body = E * rpy_dot for the Rz*Ry*Rx convention. Its
/// inverse is singular at |pitch| = pi/2.
Matrix3d euler_rate_to_body(const Vector3d& rpy);

/// Projects a nearly orthonormal matrix back onto SO(3).
Matrix3d orthonormalize(const Matrix3d& m);

/// Wraps to [-pi, pi]; odd multiples of pi may land on either end.
double wrap_angle(double a);

}  // namespace so3

/// Pose error (translation difference, then rotation log of target^T * actual).
Eigen::Matrix<double, 6, 1> pose_error(const RigidTransform& actual, const RigidTransform& target);

}  // namespace aerovkc
