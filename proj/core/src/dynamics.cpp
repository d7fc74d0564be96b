#include "aerovkc/dynamics.hpp"

#include "aerovkc/rigid_body.hpp"

#include <cmath>

namespace aerovkc {

namespace {

Matrix3d parallel_axis(double m, const Vector3d& r) {
  return m * (r.squaredNorm() * Matrix3d::Identity() - r * r.transpose());
}

Eigen::VectorXd dyn(const Vector4d& v) { return Eigen::VectorXd(v); }

}  // namespace

VehicleState VehicleState::from_rpy(const Vector3d& p, const Vector3d& rpy, const Vector3d& v,
                                    const Vector3d& omega) {
  VehicleState s;
  s.p = p;
  s.R = so3::from_rpy(rpy);
  s.v = v;
  s.omega = omega;
  return s;
}

Vector3d euler_rates(const Vector3d& rpy, const Vector3d& omega_body) {
  if (std::abs(std::cos(rpy.y())) < std::sin(0.01))
    throw Error("euler_rates: pitch within 0.01 rad of gimbal lock");
  return so3::euler_rate_to_body(rpy).inverse() * omega_body;
}

Matrix3d generator_base_rotation(const VehicleParams& v, int i) {
  const Vector3d e = v.d[static_cast<std::size_t>(i)].normalized();
  Matrix3d r;
  r.col(0) = e;
  r.col(1) = Vector3d::UnitZ().cross(e);
  r.col(2) = Vector3d::UnitZ();
  return r;
}

Matrix3d generator_rotation(const VehicleParams& v, int i, double tilt, double twist) {
  return generator_base_rotation(v, i) * so3::rot_x(tilt) * so3::rot_y(twist);
}

Vector3d thrust_direction(double tilt, double twist) {
  return {std::sin(twist), -std::sin(tilt) * std::cos(twist), std::cos(tilt) * std::cos(twist)};
}

Vector6d vehicle_wrench(const VehicleParams& v, const ThrustCommand& cmd) {
  Vector6d u = Vector6d::Zero();
  for (int i = 0; i < 4; ++i) {
    const Vector3d f = generator_base_rotation(v, i) * thrust_direction(cmd.tilt[i], cmd.twist[i]) * cmd.thrust[i];
    u.head<3>() += f;
    u.tail<3>() += v.d[static_cast<std::size_t>(i)].cross(f);
  }
  return u;
}

Matrix3d composite_inertia(const Platform& platform, const Vector4d& q_M) {
  const VehicleParams& v = platform.params().vehicle;
  Matrix3d j = v.I0;
  for (std::size_t i = 0; i < 4; ++i) j += v.I_gen[i] + parallel_axis(v.m_gen[i], v.d[i]);
  const KinematicChain& arm = platform.arm_chain();
  const auto poses = link_poses(arm, dyn(q_M));
  for (std::size_t k = 1; k < poses.size(); ++k) {
    const Link& l = arm.links()[k];
    const Matrix3d& r = poses[k].rotation;
    j += r * l.inertia * r.transpose() + parallel_axis(l.mass, poses[k] * l.com);
  }
  return 0.5 * (j + j.transpose());
}

Vector3d com_offset(const Platform& platform, const Vector4d& q_M) {
  const VehicleParams& v = platform.params().vehicle;
  Vector3d weighted = Vector3d::Zero();
  for (std::size_t i = 0; i < 4; ++i) weighted += v.m_gen[i] * v.d[i];
  const rbd::MassSummary arm = rbd::mass_summary(platform.arm_chain(), dyn(q_M), 1);
  weighted += arm.mass * arm.com;
  return weighted / platform.mass();
}

Vector3d gravity_torque(const Platform& platform, const Vector4d& q_M, const Matrix3d& R_WB) {
  const double m = platform.mass();
  const Vector3d g_world(0.0, 0.0, -platform.params().vehicle.g);
  return com_offset(platform, q_M).cross(m * (R_WB.transpose() * g_world));
}

VehicleAccel vehicle_accel(const Platform& platform, const Vector4d& q_M, const VehicleState& state,
                           const Vector6d& u) {
  const double m = platform.mass();
  const double g = platform.params().vehicle.g;
  const Matrix3d j = composite_inertia(platform, q_M);
  const Vector3d tau_g = gravity_torque(platform, q_M, state.R);
  VehicleAccel a;
  a.v_dot = (state.R * u.head<3>()) / m - g * Vector3d::UnitZ();
  a.omega_dot = j.ldlt().solve(u.tail<3>() + tau_g - state.omega.cross(j * state.omega));
  return a;
}

Matrix4d arm_mass_matrix(const Platform& platform, const Vector4d& q) {
  Matrix4d m = rbd::mass_matrix(platform.arm_chain(), dyn(q));
  m.diagonal().array() += platform.params().arm.armature;
  return m;
}

ArmTerms arm_dynamics_terms(const Platform& platform, const ArmState& arm) {
  return arm_dynamics_terms(platform, arm, Vector3d(0.0, 0.0, -platform.params().vehicle.g));
}

ArmTerms arm_dynamics_terms(const Platform& platform, const ArmState& arm, const Vector3d& gravity) {
  const KinematicChain& chain = platform.arm_chain();
  const Eigen::VectorXd q = dyn(arm.q);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  ArmTerms t;
  t.M = arm_mass_matrix(platform, arm.q);
  t.C = rbd::inverse_dynamics(chain, q, dyn(arm.qd), zero, Vector3d::Zero());
  t.G = rbd::inverse_dynamics(chain, q, zero, zero, gravity);
  return t;
}

Vector4d arm_accel(const Platform& platform, const ArmState& arm, const Vector4d& tau, const Vector6d& F_ext,
                   const Eigen::Matrix<double, 6, 4>& J_ext) {
  return arm_accel(platform, arm, tau, F_ext, J_ext, Vector3d(0.0, 0.0, -platform.params().vehicle.g));
}

Vector4d arm_accel(const Platform& platform, const ArmState& arm, const Vector4d& tau, const Vector6d& F_ext,
                   const Eigen::Matrix<double, 6, 4>& J_ext, const Vector3d& gravity) {
  const ArmTerms t = arm_dynamics_terms(platform, arm, gravity);
  const Eigen::LLT<Matrix4d> llt(t.M);
  if (llt.info() != Eigen::Success) throw Error("arm_accel: manipulator inertia matrix is singular");
  return llt.solve(tau + J_ext.transpose() * F_ext - t.C - t.G);
}

Matrix4d coriolis_matrix(const Platform& platform, const ArmState& arm) {
  constexpr double h = 1e-6;
  std::array<Matrix4d, 4> dm;
  for (int k = 0; k < 4; ++k) {
    Vector4d qp = arm.q, qm = arm.q;
    qp[k] += h;
    qm[k] -= h;
    dm[static_cast<std::size_t>(k)] = (arm_mass_matrix(platform, qp) - arm_mass_matrix(platform, qm)) / (2 * h);
  }
  Matrix4d c = Matrix4d::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const auto ju = static_cast<std::size_t>(j);
        const auto iu = static_cast<std::size_t>(i);
        c(i, j) += 0.5 * (dm[ku](i, j) + dm[ju](i, k) - dm[iu](j, k)) * arm.qd[k];
      }
  return c;
}

Eigen::Matrix<double, 6, 4> arm_jacobian(const Platform& platform, const Vector4d& q, std::string_view link) {
  return jacobian(platform.arm_chain(), dyn(q), link);
}

RigidTransform arm_fk(const Platform& platform, const Vector4d& q, std::string_view link) {
  return forward_kinematics(platform.arm_chain(), dyn(q), link);
}

}  // namespace aerovkc
