#pragma once

#include "aerovkc/geometry.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace aerovkc {

class KinematicsError : public Error {
 public:
  using Error::Error;
};

/// Collision geometry attached to a link (or to the world).
///
/// `dimensions` holds the radius for spheres, (radius, half length) for
/// capsules whose segment runs along local z, and half extents for boxes.
struct CollisionPrimitive {
  enum class Kind { sphere, capsule, box };

  std::string name;
  Kind kind = Kind::sphere;
  Vector3d dimensions = Vector3d::Zero();
  std::string attached_to = "world";
  RigidTransform offset;

  static CollisionPrimitive sphere(std::string name, double radius, const RigidTransform& offset = {});
  static CollisionPrimitive capsule(std::string name, double radius, double half_length,
                                    const RigidTransform& offset = {});
  static CollisionPrimitive box(std::string name, const Vector3d& half_extents,
                                const RigidTransform& offset = {});

  bool operator==(const CollisionPrimitive&) const = default;
};

enum class JointKind { revolute, prismatic, fixed };

std::string_view to_string(JointKind kind);
JointKind joint_kind_from_string(std::string_view s);

struct JointLimits {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const JointLimits&) const = default;
};

/// Joint between consecutive links. The child link frame is
/// origin * motion(q) * child_offset relative to the parent link frame; the
/// axis is expressed in the joint frame (origin) and passes through its origin.
struct Joint {
  std::string name;
  JointKind kind = JointKind::fixed;
  Vector3d axis = Vector3d::UnitZ();
  RigidTransform origin;
  RigidTransform child_offset;
  JointLimits limits;
  double vel_limit = 0.0;
  double acc_limit = 0.0;
  /// Set on the fixed joint inserted by attach_virtual_joint.
  bool virtual_attachment = false;

  bool operator==(const Joint&) const = default;

  /// Transform of the child link in the parent link frame at joint value q.
  RigidTransform transform(double q) const;
};

struct Link {
  std::string name;
  double mass = 0.0;
  Vector3d com = Vector3d::Zero();
  Matrix3d inertia = Matrix3d::Zero();
  std::vector<CollisionPrimitive> collision_geoms;

  bool operator==(const Link&) const = default;
};

/// Element-level invariant checks; throw KinematicsError.
void validate_link(const Link& link);
void validate_joint(const Joint& joint);

/// Joint-space state of a chain; one entry per non-fixed joint, in chain order.
using ChainState = Eigen::VectorXd;

/// Strictly serial chain: links[0] -joints[0]- links[1] - ... - links[n].
/// Immutable after construction; the constructor validates every invariant.
class KinematicChain {
 public:
  KinematicChain(std::vector<Link> links, std::vector<Joint> joints);

  const std::string& root_link() const { return links_.front().name; }
  const std::string& tip_link() const { return links_.back().name; }
  int dof() const { return dof_; }

  const std::vector<Link>& links() const { return links_; }
  const std::vector<Joint>& joints() const { return joints_; }

  bool has_link(std::string_view name) const;
  /// Throws KinematicsError for unknown names.
  int link_index(std::string_view name) const;
  int joint_index(std::string_view name) const;
  /// State index of joint `j`, or -1 for fixed joints.
  int dof_index(int joint) const { return dof_of_joint_[static_cast<std::size_t>(joint)]; }
  /// Joint index driving state entry `i`.
  int joint_of_dof(int i) const { return joint_of_dof_[static_cast<std::size_t>(i)]; }
  std::optional<int> virtual_joint() const;

  Eigen::VectorXd lower_limits() const;
  Eigen::VectorXd upper_limits() const;
  std::vector<std::string> dof_names() const;

  void check_state(const ChainState& q) const;
  bool within_limits(const ChainState& q, double tol = 0.0) const;

  bool operator==(const KinematicChain& o) const { return links_ == o.links_ && joints_ == o.joints_; }

 private:
  std::vector<Link> links_;
  std::vector<Joint> joints_;
  int dof_ = 0;
  std::vector<int> dof_of_joint_;
  std::vector<int> joint_of_dof_;
  std::unordered_map<std::string, int> link_lookup_;
};

using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Poses of every link in the root frame.
std::vector<RigidTransform> link_poses(const KinematicChain& chain, const ChainState& q);

RigidTransform forward_kinematics(const KinematicChain& chain, const ChainState& q,
                                  std::string_view target_link);

/// Geometric Jacobian (linear rows, then angular rows) in the root frame of the
/// point `point` (target link frame) rigidly attached to `target_link`.
Jacobian jacobian(const KinematicChain& chain, const ChainState& q, std::string_view target_link,
                  const Vector3d& point = Vector3d::Zero());

/// Re-roots the chain at `new_root` (its tip). A joint value q on the input
/// chain corresponds to -q on the result.
KinematicChain invert_chain(const KinematicChain& chain, std::string_view new_root);

KinematicChain attach_virtual_joint(const KinematicChain& robot, std::string_view ee_link,
                                    const KinematicChain& object, const RigidTransform& grasp_offset);

struct DetachedChains {
  KinematicChain robot;
  KinematicChain object;
  RigidTransform grasp_offset;
};
DetachedChains detach_virtual_joint(const KinematicChain& vkc);

/// Returns a copy with every link and joint name prefixed by `prefix`.
KinematicChain prefixed(const KinematicChain& chain, std::string_view prefix);

struct VirtualBaseLimits {
  Vector3d position_min{-10.0, -10.0, -10.0};
  Vector3d position_max{10.0, 10.0, 10.0};
  Vector3d rpy_min{-4.0, -1.3, -4.0};
  Vector3d rpy_max{4.0, 1.3, 4.0};
  double linear_vel = 1.0;
  double angular_vel = 3.0;
  double linear_acc = 2.0;
  double angular_acc = 6.0;
};

/// Names of the six virtual base joints in chain order.
inline constexpr std::string_view kBaseJointNames[6] = {"base_x",   "base_y",     "base_z",
                                                        "base_yaw", "base_pitch", "base_roll"};
inline constexpr std::string_view kWorldLink = "world";

/// Prepends prismatic x, y, z and revolute yaw, pitch, roll joints (so that
/// the body attitude is Rz*Ry*Rx) to a chain rooted at the vehicle body.
KinematicChain build_virtual_base(const KinematicChain& robot_body, const VirtualBaseLimits& limits = {});

/// Writes position p and roll-pitch-yaw into the first six state entries of a
/// virtual-base chain (which stores them as x, y, z, yaw, pitch, roll).
void set_base_pose(ChainState& q, const Vector3d& p, const Vector3d& rpy);
Vector3d base_position(const ChainState& q);
Vector3d base_rpy(const ChainState& q);

}  // namespace aerovkc
