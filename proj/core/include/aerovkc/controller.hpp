#pragma once

#include "aerovkc/dynamics.hpp"

namespace aerovkc {

/// Diagonal gains. Vehicle loops follow u = r_ddot + K1 e_dot + K2 e + K3 int(e);
/// the arm follows q_dd^d = q_dd^r + K_M1 e + K_M2 e_dot + K_M3 int(e).
struct Gains {
  Vector3d kv1 = Vector3d::Constant(9.0);
  Vector3d kv2 = Vector3d::Constant(26.0);
  Vector3d kv3 = Vector3d::Constant(24.0);
  Vector3d kw1 = Vector3d::Constant(18.0);
  Vector3d kw2 = Vector3d::Constant(104.0);
  Vector3d kw3 = Vector3d::Constant(192.0);
  Vector4d km1 = Vector4d::Constant(188.0);
  Vector4d km2 = Vector4d::Constant(24.0);
  Vector4d km3 = Vector4d::Constant(480.0);
  /// Symmetric clamp on every integral state.
  double integral_clamp = 1.0;

  /// Throws Error for negative entries.
  void validate() const;
};

struct WrenchCommand {
  Vector3d force = Vector3d::Zero();
  Vector3d torque = Vector3d::Zero();

  Vector6d stacked() const { return (Vector6d() << force, torque).finished(); }
  static WrenchCommand from(const Vector6d& u) { return {u.head<3>(), u.tail<3>()}; }
};

struct TrackingErrors {
  Vector3d e_p = Vector3d::Zero();
  Vector3d e_v = Vector3d::Zero();
  Vector3d e_theta = Vector3d::Zero();
  Vector3d e_omega = Vector3d::Zero();
  Vector3d int_p = Vector3d::Zero();
  Vector3d int_theta = Vector3d::Zero();
};

/// Instantaneous errors of `state` with respect to `ref` (integrals left at zero).
TrackingErrors tracking_errors(const VehicleState& state, const VehicleState& ref);

/// Adds dt * (e_p, e_theta) to the integrals and clamps them.
void integrate_errors(TrackingErrors& errs, const Vector3d& int_p, const Vector3d& int_theta, double dt,
                      double clamp);

struct VirtualInputs {
  Vector3d u_v = Vector3d::Zero();
  Vector3d u_omega = Vector3d::Zero();
};
VirtualInputs virtual_inputs(const TrackingErrors& errs, const Vector3d& v_dot_ref, const Vector3d& omega_dot_ref,
                             const Gains& gains);

/// Feedback-linearising wrench: inverts the vehicle model so that the closed
/// loop sees v_dot = u_v and omega_dot = u_omega.
WrenchCommand high_level_wrench(const Platform& platform, const Vector4d& q_M, const VehicleState& state,
                                const Vector3d& u_v, const Vector3d& u_omega);

struct Allocation {
  ThrustCommand command;
  bool saturated = false;
  /// Factor applied to the requested wrench (1 when unsaturated).
  double scale = 1.0;
};

/// Minimum-norm allocation over the 12 per-generator force components. Of the
/// two gimbal solutions for each force direction the one closest to
/// `previous` is returned; a generator with (near) zero thrust keeps its angles.
Allocation allocate(const VehicleParams& v, const WrenchCommand& u_d, const ThrustCommand& previous = {});

struct ActuatorParams {
  double gimbal_tau = 0.02;
  double motor_tau = 0.015;
};

/// Closed-loop generator response over dt: first-order lags on thrust, tilt and
/// twist (angle errors wrapped), thrust clamped to [0, 4 t_max].
ThrustCommand low_level_actuator(const ThrustCommand& cmd, const ThrustCommand& actual, double dt,
                                 const ActuatorParams& params, double max_thrust);

struct ArmReference {
  Vector4d q = Vector4d::Zero();
  Vector4d qd = Vector4d::Zero();
  Vector4d qdd = Vector4d::Zero();
};

/// Computed torque M (q_dd^r + K_M1 e + K_M2 e_dot + K_M3 int e) + C + G.
/// `integral` is the running integral of e, already updated by the caller.
Vector4d arm_torque(const Platform& platform, const ArmState& arm, const ArmReference& ref, const Vector4d& integral,
                    const Gains& gains, const Vector3d& gravity_body);
Vector4d arm_torque(const Platform& platform, const ArmState& arm, const ArmReference& ref, const Vector4d& integral,
                    const Gains& gains);

}  // namespace aerovkc
