#include "aerovkc/controller.hpp"

#include <cmath>

namespace aerovkc {

namespace {

using AllocMatrix = Eigen::Matrix<double, 6, 12>;

AllocMatrix allocation_matrix(const VehicleParams& v) {
  AllocMatrix a;
  for (int i = 0; i < 4; ++i) {
    a.block<3, 3>(0, 3 * i) = Matrix3d::Identity();
    a.block<3, 3>(3, 3 * i) = so3::skew(v.d[static_cast<std::size_t>(i)]);
  }
  return a;
}

double angle_distance(double a, double b) { return std::abs(so3::wrap_angle(a - b)); }

}  // namespace

void Gains::validate() const {
  const bool ok = (kv1.array() >= 0).all() && (kv2.array() >= 0).all() && (kv3.array() >= 0).all() &&
                  (kw1.array() >= 0).all() && (kw2.array() >= 0).all() && (kw3.array() >= 0).all() &&
                  (km1.array() >= 0).all() && (km2.array() >= 0).all() && (km3.array() >= 0).all() &&
                  integral_clamp >= 0.0;
  if (!ok) throw Error("gains must be non-negative");
}

TrackingErrors tracking_errors(const VehicleState& state, const VehicleState& ref) {
  TrackingErrors e;
  e.e_p = ref.p - state.p;
  e.e_v = ref.v - state.v;
  const Matrix3d rel = state.R.transpose() * ref.R;
  e.e_theta = 0.5 * so3::vee(rel - rel.transpose());
  e.e_omega = rel * ref.omega - state.omega;
  return e;
}

void integrate_errors(TrackingErrors& errs, const Vector3d& int_p, const Vector3d& int_theta, double dt,
                      double clamp) {
  errs.int_p = (int_p + dt * errs.e_p).cwiseMax(-clamp).cwiseMin(clamp);
  errs.int_theta = (int_theta + dt * errs.e_theta).cwiseMax(-clamp).cwiseMin(clamp);
}

VirtualInputs virtual_inputs(const TrackingErrors& e, const Vector3d& v_dot_ref, const Vector3d& omega_dot_ref,
                             const Gains& k) {
  VirtualInputs u;
  u.u_v = v_dot_ref + k.kv1.cwiseProduct(e.e_v) + k.kv2.cwiseProduct(e.e_p) + k.kv3.cwiseProduct(e.int_p);
  u.u_omega = omega_dot_ref + k.kw1.cwiseProduct(e.e_omega) + k.kw2.cwiseProduct(e.e_theta) +
              k.kw3.cwiseProduct(e.int_theta);
  return u;
}

WrenchCommand high_level_wrench(const Platform& platform, const Vector4d& q_M, const VehicleState& state,
                                const Vector3d& u_v, const Vector3d& u_omega) {
  const double m = platform.mass();
  const double g = platform.params().vehicle.g;
  const Matrix3d j = composite_inertia(platform, q_M);
  const Vector3d tau_g = gravity_torque(platform, q_M, state.R);
  WrenchCommand w;
  w.force = m * state.R.transpose() * (u_v + g * Vector3d::UnitZ());
  w.torque = j * u_omega - (tau_g - state.omega.cross(j * state.omega));
  return w;
}

Allocation allocate(const VehicleParams& v, const WrenchCommand& u_d, const ThrustCommand& previous) {
  const AllocMatrix a = allocation_matrix(v);
  const Eigen::Matrix<double, 6, 6> aat = a * a.transpose();
  const Eigen::Matrix<double, 12, 1> f = a.transpose() * aat.ldlt().solve(u_d.stacked());

  Allocation out;
  double peak = 0.0;
  for (int i = 0; i < 4; ++i) peak = std::max(peak, f.segment<3>(3 * i).norm());
  const double limit = v.generator_max_thrust();
  if (peak > limit) {
    out.saturated = true;
    out.scale = limit / peak;
  }
  for (int i = 0; i < 4; ++i) {
    const Vector3d fi = out.scale * f.segment<3>(3 * i);
    const double t = fi.norm();
    out.command.thrust[i] = std::min(t, limit);
    if (t < 1e-9) {
      out.command.tilt[i] = previous.tilt[i];
      out.command.twist[i] = previous.twist[i];
      continue;
    }
    const Vector3d dir = generator_base_rotation(v, i).transpose() * fi / t;
    const double twist = std::asin(std::clamp(dir.x(), -1.0, 1.0));
    const double tilt = std::atan2(-dir.y(), dir.z());
    const double tilt2 = so3::wrap_angle(tilt + M_PI);
    const double twist2 = so3::wrap_angle(M_PI - twist);
    const double d1 = angle_distance(tilt, previous.tilt[i]) + angle_distance(twist, previous.twist[i]);
    const double d2 = angle_distance(tilt2, previous.tilt[i]) + angle_distance(twist2, previous.twist[i]);
    // Keep the angles continuous with the previous command (no 2*pi jumps).
    const double base_tilt = d2 < d1 ? tilt2 : tilt;
    const double base_twist = d2 < d1 ? twist2 : twist;
    out.command.tilt[i] = previous.tilt[i] + so3::wrap_angle(base_tilt - previous.tilt[i]);
    out.command.twist[i] = previous.twist[i] + so3::wrap_angle(base_twist - previous.twist[i]);
  }
  return out;
}

ThrustCommand low_level_actuator(const ThrustCommand& cmd, const ThrustCommand& actual, double dt,
                                 const ActuatorParams& params, double max_thrust) {
  if (!(dt > 0.0)) throw Error("low_level_actuator: dt must be positive");
  const double kg = params.gimbal_tau > 0.0 ? 1.0 - std::exp(-dt / params.gimbal_tau) : 1.0;
  const double km = params.motor_tau > 0.0 ? 1.0 - std::exp(-dt / params.motor_tau) : 1.0;
  ThrustCommand out;
  for (int i = 0; i < 4; ++i) {
    const double target = std::clamp(cmd.thrust[i], 0.0, max_thrust);
    out.thrust[i] = std::clamp(actual.thrust[i] + km * (target - actual.thrust[i]), 0.0, max_thrust);
    out.tilt[i] = actual.tilt[i] + kg * so3::wrap_angle(cmd.tilt[i] - actual.tilt[i]);
    out.twist[i] = actual.twist[i] + kg * so3::wrap_angle(cmd.twist[i] - actual.twist[i]);
  }
  return out;
}

Vector4d arm_torque(const Platform& platform, const ArmState& arm, const ArmReference& ref, const Vector4d& integral,
                    const Gains& gains, const Vector3d& gravity_body) {
  const ArmTerms t = arm_dynamics_terms(platform, arm, gravity_body);
  const Vector4d e = ref.q - arm.q;
  const Vector4d ed = ref.qd - arm.qd;
  const Vector4d qdd = ref.qdd + gains.km1.cwiseProduct(e) + gains.km2.cwiseProduct(ed) + gains.km3.cwiseProduct(integral);
  return t.M * qdd + t.C + t.G;
}

Vector4d arm_torque(const Platform& platform, const ArmState& arm, const ArmReference& ref, const Vector4d& integral,
                    const Gains& gains) {
  return arm_torque(platform, arm, ref, integral, gains, Vector3d(0.0, 0.0, -platform.params().vehicle.g));
}

}  // namespace aerovkc
