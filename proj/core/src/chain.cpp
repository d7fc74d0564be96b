#include "aerovkc/chain.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>

namespace aerovkc {

CollisionPrimitive CollisionPrimitive::sphere(std::string name, double radius, const RigidTransform& offset) {
  CollisionPrimitive p;
  p.name = std::move(name);
  p.kind = Kind::sphere;
  p.dimensions = Vector3d(radius, 0.0, 0.0);
  p.offset = offset;
  return p;
}

CollisionPrimitive CollisionPrimitive::capsule(std::string name, double radius, double half_length,
                                               const RigidTransform& offset) {
  CollisionPrimitive p;
  p.name = std::move(name);
  p.kind = Kind::capsule;
  p.dimensions = Vector3d(radius, half_length, 0.0);
  p.offset = offset;
  return p;
}

CollisionPrimitive CollisionPrimitive::box(std::string name, const Vector3d& half_extents,
                                           const RigidTransform& offset) {
  CollisionPrimitive p;
  p.name = std::move(name);
  p.kind = Kind::box;
  p.dimensions = half_extents;
  p.offset = offset;
  return p;
}

std::string_view to_string(JointKind kind) {
  switch (kind) {
    case JointKind::revolute: return "revolute";
    case JointKind::prismatic: return "prismatic";
    case JointKind::fixed: return "fixed";
  }
  return "fixed";
}

JointKind joint_kind_from_string(std::string_view s) {
  if (s == "revolute") return JointKind::revolute;
  if (s == "prismatic") return JointKind::prismatic;
  if (s == "fixed") return JointKind::fixed;
  throw KinematicsError("unknown joint kind '" + std::string(s) + "'");
}

RigidTransform Joint::transform(double q) const {
  switch (kind) {
    case JointKind::revolute:
      return origin * RigidTransform::from_rotation(so3::exp(axis * q)) * child_offset;
    case JointKind::prismatic:
      return origin * RigidTransform::from_translation(axis * q) * child_offset;
    case JointKind::fixed:
      break;
  }
  return origin * child_offset;
}

void validate_link(const Link& link) {
  if (link.name.empty()) throw KinematicsError("link with empty name");
  if (!(link.mass >= 0.0) || !std::isfinite(link.mass))
    throw KinematicsError("link '" + link.name + "': mass must be finite and >= 0");
  const Matrix3d& i = link.inertia;
  if (!i.allFinite() || (i - i.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw KinematicsError("link '" + link.name + "': inertia must be symmetric");
  const Vector3d ev = Eigen::SelfAdjointEigenSolver<Matrix3d>(i).eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -1e-12 * scale)
    throw KinematicsError("link '" + link.name + "': inertia must be positive semidefinite");
  const double slack = 1e-12 * scale;
  if (ev[0] + ev[1] < ev[2] - slack || ev[0] + ev[2] < ev[1] - slack || ev[1] + ev[2] < ev[0] - slack)
    throw KinematicsError("link '" + link.name + "': principal moments violate the triangle inequality");
  for (const auto& g : link.collision_geoms) {
    const int n = g.kind == CollisionPrimitive::Kind::sphere ? 1 : g.kind == CollisionPrimitive::Kind::capsule ? 2 : 3;
    for (int k = 0; k < n; ++k)
      if (!(g.dimensions[k] > 0.0))
        throw KinematicsError("link '" + link.name + "': collision geometry '" + g.name +
                              "' needs positive dimensions");
    if (!g.offset.is_valid()) throw KinematicsError("link '" + link.name + "': invalid collision offset");
  }
}

void validate_joint(const Joint& j) {
  if (j.name.empty()) throw KinematicsError("joint with empty name");
  if (j.kind != JointKind::fixed && std::abs(j.axis.norm() - 1.0) > 1e-12)
    throw KinematicsError("joint '" + j.name + "': axis must be a unit vector");
  if (!(j.limits.min <= j.limits.max))
    throw KinematicsError("joint '" + j.name + "': limits.min must not exceed limits.max");
  if (!(j.vel_limit >= 0.0) || !(j.acc_limit >= 0.0))
    throw KinematicsError("joint '" + j.name + "': velocity/acceleration limits must be >= 0");
  if (!j.origin.is_valid() || !j.child_offset.is_valid())
    throw KinematicsError("joint '" + j.name + "': origin is not a rigid transform");
}

KinematicChain::KinematicChain(std::vector<Link> links, std::vector<Joint> joints)
    : links_(std::move(links)), joints_(std::move(joints)) {
  if (links_.empty()) throw KinematicsError("chain needs at least one link");
  if (links_.size() != joints_.size() + 1)
    throw KinematicsError("serial chain needs exactly one joint between consecutive links");
  std::set<std::string> joint_names;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    validate_link(links_[i]);
    for (auto& g : links_[i].collision_geoms) g.attached_to = links_[i].name;
    if (!link_lookup_.emplace(links_[i].name, static_cast<int>(i)).second)
      throw KinematicsError("duplicate link name '" + links_[i].name + "'");
  }
  int virtual_count = 0;
  for (const auto& j : joints_) {
    validate_joint(j);
    if (!joint_names.insert(j.name).second) throw KinematicsError("duplicate joint name '" + j.name + "'");
    if (j.virtual_attachment) {
      if (j.kind != JointKind::fixed) throw KinematicsError("virtual joint '" + j.name + "' must be fixed");
      ++virtual_count;
    }
    if (j.kind == JointKind::fixed) {
      dof_of_joint_.push_back(-1);
    } else {
      dof_of_joint_.push_back(dof_++);
      joint_of_dof_.push_back(static_cast<int>(dof_of_joint_.size()) - 1);
    }
  }
  if (virtual_count > 1) throw KinematicsError("chain holds more than one virtual joint");
}

bool KinematicChain::has_link(std::string_view name) const { return link_lookup_.contains(std::string(name)); }

int KinematicChain::link_index(std::string_view name) const {
  const auto it = link_lookup_.find(std::string(name));
  if (it == link_lookup_.end()) throw KinematicsError("unknown link '" + std::string(name) + "'");
  return it->second;
}

int KinematicChain::joint_index(std::string_view name) const {
  for (std::size_t i = 0; i < joints_.size(); ++i)
    if (joints_[i].name == name) return static_cast<int>(i);
  throw KinematicsError("unknown joint '" + std::string(name) + "'");
}

std::optional<int> KinematicChain::virtual_joint() const {
  for (std::size_t i = 0; i < joints_.size(); ++i)
    if (joints_[i].virtual_attachment) return static_cast<int>(i);
  return std::nullopt;
}

Eigen::VectorXd KinematicChain::lower_limits() const {
  Eigen::VectorXd v(dof_);
  for (int i = 0; i < dof_; ++i) v[i] = joints_[static_cast<std::size_t>(joint_of_dof_[static_cast<std::size_t>(i)])].limits.min;
  return v;
}

Eigen::VectorXd KinematicChain::upper_limits() const {
  Eigen::VectorXd v(dof_);
  for (int i = 0; i < dof_; ++i) v[i] = joints_[static_cast<std::size_t>(joint_of_dof_[static_cast<std::size_t>(i)])].limits.max;
  return v;
}

std::vector<std::string> KinematicChain::dof_names() const {
  std::vector<std::string> names;
  for (int j : joint_of_dof_) names.push_back(joints_[static_cast<std::size_t>(j)].name);
  return names;
}

void KinematicChain::check_state(const ChainState& q) const {
  if (q.size() != dof_)
    throw KinematicsError("state has " + std::to_string(q.size()) + " entries, chain has " +
                          std::to_string(dof_) + " DoF");
}

bool KinematicChain::within_limits(const ChainState& q, double tol) const {
  check_state(q);
  return ((q - lower_limits()).array() >= -tol).all() && ((upper_limits() - q).array() >= -tol).all();
}

std::vector<RigidTransform> link_poses(const KinematicChain& chain, const ChainState& q) {
  chain.check_state(q);
  const auto& joints = chain.joints();
  std::vector<RigidTransform> poses(chain.links().size());
  for (std::size_t j = 0; j < joints.size(); ++j) {
    const int d = chain.dof_index(static_cast<int>(j));
    poses[j + 1] = poses[j] * joints[j].transform(d >= 0 ? q[d] : 0.0);
  }
  return poses;
}

RigidTransform forward_kinematics(const KinematicChain& chain, const ChainState& q, std::string_view target_link) {
  const int target = chain.link_index(target_link);
  chain.check_state(q);
  RigidTransform pose;
  const auto& joints = chain.joints();
  for (int j = 0; j < target; ++j) {
    const int d = chain.dof_index(j);
    pose = pose * joints[static_cast<std::size_t>(j)].transform(d >= 0 ? q[d] : 0.0);
  }
  return pose;
}

Jacobian jacobian(const KinematicChain& chain, const ChainState& q, std::string_view target_link,
                  const Vector3d& point) {
  const int target = chain.link_index(target_link);
  chain.check_state(q);
  Jacobian jac = Jacobian::Zero(6, chain.dof());
  const auto& joints = chain.joints();

  std::vector<RigidTransform> frames(static_cast<std::size_t>(target));
  RigidTransform pose;
  for (int j = 0; j < target; ++j) {
    const auto& joint = joints[static_cast<std::size_t>(j)];
    frames[static_cast<std::size_t>(j)] = pose * joint.origin;
    const int d = chain.dof_index(j);
    pose = pose * joint.transform(d >= 0 ? q[d] : 0.0);
  }
  const Vector3d p = pose * point;
  for (int j = 0; j < target; ++j) {
    const int d = chain.dof_index(j);
    if (d < 0) continue;
    const auto& f = frames[static_cast<std::size_t>(j)];
    const Vector3d z = f.rotation * joints[static_cast<std::size_t>(j)].axis;
    if (joints[static_cast<std::size_t>(j)].kind == JointKind::revolute) {
      jac.block<3, 1>(0, d) = z.cross(p - f.translation);
      jac.block<3, 1>(3, d) = z;
    } else {
      jac.block<3, 1>(0, d) = z;
    }
  }
  return jac;
}

KinematicChain invert_chain(const KinematicChain& chain, std::string_view new_root) {
  const int idx = chain.link_index(new_root);
  const int n = static_cast<int>(chain.links().size());
  if (idx == 0) return chain;
  if (idx != n - 1)
    throw KinematicsError("cannot re-root at interior link '" + std::string(new_root) +
                          "': the inverted chain would branch");
  std::vector<Link> links(chain.links().rbegin(), chain.links().rend());
  std::vector<Joint> joints;
  joints.reserve(chain.joints().size());
  for (auto it = chain.joints().rbegin(); it != chain.joints().rend(); ++it) {
    Joint j = *it;
    j.origin = it->child_offset.inverse();
    j.child_offset = it->origin.inverse();
    j.limits = {-it->limits.max, -it->limits.min};
    joints.push_back(std::move(j));
  }
  return {std::move(links), std::move(joints)};
}

KinematicChain attach_virtual_joint(const KinematicChain& robot, std::string_view ee_link,
                                    const KinematicChain& object, const RigidTransform& grasp_offset) {
  const int ee = robot.link_index(ee_link);
  if (ee != static_cast<int>(robot.links().size()) - 1)
    throw KinematicsError("end-effector '" + std::string(ee_link) +
                          "' must be the robot tip for the chain to stay serial");
  if (robot.virtual_joint()) throw KinematicsError("robot chain already holds a virtual joint");
  if (!grasp_offset.is_valid()) throw KinematicsError("grasp offset is not a rigid transform");
  std::vector<Link> links = robot.links();
  std::vector<Joint> joints = robot.joints();
  Joint vj;
  vj.name = "virtual_joint";
  vj.kind = JointKind::fixed;
  vj.origin = grasp_offset;
  vj.virtual_attachment = true;
  joints.push_back(vj);
  links.insert(links.end(), object.links().begin(), object.links().end());
  joints.insert(joints.end(), object.joints().begin(), object.joints().end());
  // The constructor rejects name collisions and double attachment.
  return {std::move(links), std::move(joints)};
}

DetachedChains detach_virtual_joint(const KinematicChain& vkc) {
  const auto vj = vkc.virtual_joint();
  if (!vj) throw KinematicsError("chain holds no virtual joint");
  const auto k = static_cast<std::size_t>(*vj);
  const auto& links = vkc.links();
  const auto& joints = vkc.joints();
  KinematicChain robot(std::vector<Link>(links.begin(), links.begin() + static_cast<long>(k) + 1),
                       std::vector<Joint>(joints.begin(), joints.begin() + static_cast<long>(k)));
  KinematicChain object(std::vector<Link>(links.begin() + static_cast<long>(k) + 1, links.end()),
                        std::vector<Joint>(joints.begin() + static_cast<long>(k) + 1, joints.end()));
  return {std::move(robot), std::move(object), joints[k].origin};
}

KinematicChain prefixed(const KinematicChain& chain, std::string_view prefix) {
  std::vector<Link> links = chain.links();
  std::vector<Joint> joints = chain.joints();
  for (auto& l : links) {
    l.name = std::string(prefix) + l.name;
    for (auto& g : l.collision_geoms) g.attached_to = l.name;
  }
  for (auto& j : joints) j.name = std::string(prefix) + j.name;
  return {std::move(links), std::move(joints)};
}

KinematicChain build_virtual_base(const KinematicChain& robot_body, const VirtualBaseLimits& lim) {
  const std::string names[6] = {"base_x_link", "base_y_link", "base_z_link", "base_yaw_link", "base_pitch_link", ""};
  std::vector<Link> links;
  Link world;
  world.name = std::string(kWorldLink);
  links.push_back(world);
  for (int i = 0; i < 5; ++i) {
    Link l;
    l.name = names[i];
    links.push_back(l);
  }
  std::vector<Joint> joints;
  const Vector3d axes[6] = {Vector3d::UnitX(), Vector3d::UnitY(), Vector3d::UnitZ(),
                            Vector3d::UnitZ(), Vector3d::UnitY(), Vector3d::UnitX()};
  // rpy index of the yaw/pitch/roll joints
  const int rpy_index[3] = {2, 1, 0};
  for (int i = 0; i < 6; ++i) {
    Joint j;
    j.name = std::string(kBaseJointNames[i]);
    j.axis = axes[i];
    if (i < 3) {
      j.kind = JointKind::prismatic;
      j.limits = {lim.position_min[i], lim.position_max[i]};
      j.vel_limit = lim.linear_vel;
      j.acc_limit = lim.linear_acc;
    } else {
      j.kind = JointKind::revolute;
      j.limits = {lim.rpy_min[rpy_index[i - 3]], lim.rpy_max[rpy_index[i - 3]]};
      j.vel_limit = lim.angular_vel;
      j.acc_limit = lim.angular_acc;
    }
    joints.push_back(j);
  }
  links.insert(links.end(), robot_body.links().begin(), robot_body.links().end());
  joints.insert(joints.end(), robot_body.joints().begin(), robot_body.joints().end());
  return {std::move(links), std::move(joints)};
}

void set_base_pose(ChainState& q, const Vector3d& p, const Vector3d& rpy) {
  if (q.size() < 6) throw KinematicsError("state too short for a virtual base");
  q.head<3>() = p;
  q[3] = rpy.z();
  q[4] = rpy.y();
  q[5] = rpy.x();
}

Vector3d base_position(const ChainState& q) { return q.head<3>(); }

Vector3d base_rpy(const ChainState& q) { return {q[5], q[4], q[3]}; }

}  // namespace aerovkc
