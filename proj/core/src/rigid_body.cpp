#include "aerovkc/rigid_body.hpp"

namespace aerovkc::rbd {

Eigen::VectorXd inverse_dynamics(const KinematicChain& chain, const ChainState& q, const Eigen::VectorXd& qd,
                                 const Eigen::VectorXd& qdd, const Vector3d& gravity) {
  chain.check_state(q);
  if (qd.size() != q.size() || qdd.size() != q.size()) throw KinematicsError("rnea: dimension mismatch");
  const auto& links = chain.links();
  const auto& joints = chain.joints();
  const std::size_t n = links.size();

  std::vector<RigidTransform> pose(n);
  std::vector<Vector3d> omega(n, Vector3d::Zero()), omega_dot(n, Vector3d::Zero()), acc(n, Vector3d::Zero());
  std::vector<Vector3d> joint_point(joints.size()), joint_axis(joints.size());
  acc[0] = -gravity;

  for (std::size_t j = 0; j < joints.size(); ++j) {
    const Joint& jt = joints[j];
    const int d = chain.dof_index(static_cast<int>(j));
    const double qj = d >= 0 ? q[d] : 0.0;
    const double vj = d >= 0 ? qd[d] : 0.0;
    const double aj = d >= 0 ? qdd[d] : 0.0;
    const RigidTransform frame = pose[j] * jt.origin;
    pose[j + 1] = pose[j] * jt.transform(qj);
    const Vector3d o = frame.translation;
    const Vector3d z = frame.rotation * jt.axis;
    joint_point[j] = o;
    joint_axis[j] = z;

    const Vector3d r1 = o - pose[j].translation;
    const Vector3d a_o = acc[j] + omega_dot[j].cross(r1) + omega[j].cross(omega[j].cross(r1));
    const Vector3d r2 = pose[j + 1].translation - o;
    switch (jt.kind) {
      case JointKind::revolute:
        omega[j + 1] = omega[j] + z * vj;
        omega_dot[j + 1] = omega_dot[j] + z * aj + omega[j].cross(z * vj);
        acc[j + 1] = a_o + omega_dot[j + 1].cross(r2) + omega[j + 1].cross(omega[j + 1].cross(r2));
        break;
      case JointKind::prismatic:
        omega[j + 1] = omega[j];
        omega_dot[j + 1] = omega_dot[j];
        acc[j + 1] = a_o + omega_dot[j].cross(r2) + omega[j].cross(omega[j].cross(r2)) +
                     2.0 * omega[j].cross(z * vj) + z * aj;
        break;
      case JointKind::fixed:
        omega[j + 1] = omega[j];
        omega_dot[j + 1] = omega_dot[j];
        acc[j + 1] = a_o + omega_dot[j].cross(r2) + omega[j].cross(omega[j].cross(r2));
        break;
    }
  }

  // Net force and moment (about the link CoM) each link needs.
  std::vector<Vector3d> force(n), moment(n), com(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Link& l = links[k];
    const Vector3d rc = pose[k].rotation * l.com;
    com[k] = pose[k].translation + rc;
    const Vector3d a_c = acc[k] + omega_dot[k].cross(rc) + omega[k].cross(omega[k].cross(rc));
    const Matrix3d iw = pose[k].rotation * l.inertia * pose[k].rotation.transpose();
    force[k] = l.mass * a_c;
    moment[k] = iw * omega_dot[k] + omega[k].cross(iw * omega[k]);
  }

  Eigen::VectorXd tau = Eigen::VectorXd::Zero(q.size());
  Vector3d f_sum = Vector3d::Zero();
  Vector3d m_sum = Vector3d::Zero();  // about the origin of the root frame
  for (std::size_t j = joints.size(); j-- > 0;) {
    const std::size_t k = j + 1;
    f_sum += force[k];
    m_sum += moment[k] + com[k].cross(force[k]);
    const int d = chain.dof_index(static_cast<int>(j));
    if (d < 0) continue;
    if (joints[j].kind == JointKind::revolute) {
      const Vector3d m_about_o = m_sum - joint_point[j].cross(f_sum);
      tau[d] = joint_axis[j].dot(m_about_o);
    } else {
      tau[d] = joint_axis[j].dot(f_sum);
    }
  }
  return tau;
}

Eigen::MatrixXd mass_matrix(const KinematicChain& chain, const ChainState& q) {
  const int n = chain.dof();
  Eigen::MatrixXd m(n, n);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    m.col(i) = inverse_dynamics(chain, q, zero, Eigen::VectorXd::Unit(n, i), Vector3d::Zero());
  return 0.5 * (m + m.transpose());
}

MassSummary mass_summary(const KinematicChain& chain, const ChainState& q, int first_link) {
  const auto poses = link_poses(chain, q);
  MassSummary s;
  Vector3d weighted = Vector3d::Zero();
  for (std::size_t k = static_cast<std::size_t>(first_link); k < poses.size(); ++k) {
    const Link& l = chain.links()[k];
    s.mass += l.mass;
    weighted += l.mass * (poses[k] * l.com);
  }
  if (s.mass > 0.0) s.com = weighted / s.mass;
  return s;
}

}  // namespace aerovkc::rbd
