#pragma once

#include "aerovkc/platform.hpp"

namespace aerovkc {

/// Floating-base state. Attitude is stored as a rotation matrix so that
/// flips through |pitch| = pi/2 are representable; rpy() is for logging.
struct VehicleState {
  Vector3d p = Vector3d::Zero();
  Matrix3d R = Matrix3d::Identity();
  Vector3d v = Vector3d::Zero();
  /// Body-frame angular velocity.
  Vector3d omega = Vector3d::Zero();

  static VehicleState from_rpy(const Vector3d& p, const Vector3d& rpy, const Vector3d& v = Vector3d::Zero(),
                               const Vector3d& omega = Vector3d::Zero());
  Vector3d rpy() const { return so3::to_rpy(R); }
};

/// Body-rate to Euler-rate conversion; throws Error within 0.01 rad of gimbal lock.
Vector3d euler_rates(const Vector3d& rpy, const Vector3d& omega_body);

struct ArmState {
  Vector4d q = Vector4d::Zero();
  Vector4d qd = Vector4d::Zero();
};

/// Per-generator thrust magnitude (N), tilt alpha and twist beta (rad).
struct ThrustCommand {
  Vector4d thrust = Vector4d::Zero();
  Vector4d tilt = Vector4d::Zero();
  Vector4d twist = Vector4d::Zero();

  bool operator==(const ThrustCommand&) const = default;
};

/// Gimbal-neutral frame of generator i: x along the tube, z along body z.
Matrix3d generator_base_rotation(const VehicleParams& v, int i);
/// Orientation of generator i in the body frame: tilt about the tube axis, then twist.
Matrix3d generator_rotation(const VehicleParams& v, int i, double tilt, double twist);
/// Thrust direction in the generator base frame for (tilt, twist).
Vector3d thrust_direction(double tilt, double twist);

/// Body wrench [force; torque] produced by the generators.
Vector6d vehicle_wrench(const VehicleParams& v, const ThrustCommand& cmd);

/// Whole-platform inertia about the body origin in the body frame.
Matrix3d composite_inertia(const Platform& platform, const Vector4d& q_M);
/// Whole-platform centre of mass in the body frame.
Vector3d com_offset(const Platform& platform, const Vector4d& q_M);
/// Gravity torque about the body origin, body frame.
Vector3d gravity_torque(const Platform& platform, const Vector4d& q_M, const Matrix3d& R_WB);

struct VehicleAccel {
  Vector3d v_dot = Vector3d::Zero();
  Vector3d omega_dot = Vector3d::Zero();
};

/// m v_dot = R u_f - m g z;  J omega_dot = u_tau + tau_g - omega x J omega.
VehicleAccel vehicle_accel(const Platform& platform, const Vector4d& q_M, const VehicleState& state,
                           const Vector6d& u);

/// Manipulator terms M q_dd + C + G = tau. `gravity` is expressed in the arm
/// base (body) frame; the default corresponds to level flight.
struct ArmTerms {
  Matrix4d M = Matrix4d::Zero();
  Vector4d C = Vector4d::Zero();
  Vector4d G = Vector4d::Zero();
};
ArmTerms arm_dynamics_terms(const Platform& platform, const ArmState& arm);
ArmTerms arm_dynamics_terms(const Platform& platform, const ArmState& arm, const Vector3d& gravity);

Matrix4d arm_mass_matrix(const Platform& platform, const Vector4d& q);

/// q_dd = M^-1 (tau + J_ext^T F_ext - C - G). Throws Error if M is singular.
Vector4d arm_accel(const Platform& platform, const ArmState& arm, const Vector4d& tau, const Vector6d& F_ext,
                   const Eigen::Matrix<double, 6, 4>& J_ext);
Vector4d arm_accel(const Platform& platform, const ArmState& arm, const Vector4d& tau, const Vector6d& F_ext,
                   const Eigen::Matrix<double, 6, 4>& J_ext, const Vector3d& gravity);

/// Coriolis matrix from Christoffel symbols, so that C(q, qd) qd = C_M and
/// M_dot - 2 C is skew-symmetric.
Matrix4d coriolis_matrix(const Platform& platform, const ArmState& arm);

/// Body-frame geometric Jacobian of `link` (default the tool frame).
Eigen::Matrix<double, 6, 4> arm_jacobian(const Platform& platform, const Vector4d& q,
                                         std::string_view link = kToolLink);

/// Arm link poses in the body frame.
RigidTransform arm_fk(const Platform& platform, const Vector4d& q, std::string_view link = kToolLink);

}  // namespace aerovkc
