#pragma once

#include "aerovkc/chain.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace aerovkc {

using Eigen::Matrix4d;
using Eigen::Vector4d;

/// Flying-vehicle parameters. Defaults are the measured platform values.
struct VehicleParams {
  double m0 = 0.168;
  std::array<double, 4> m_gen{0.222, 0.222, 0.222, 0.222};
  Matrix3d I0 = Vector3d(0.30e-4, 0.30e-4, 0.60e-4).asDiagonal();
  std::array<Matrix3d, 4> I_gen = uniform(Vector3d(2.23e-4, 2.84e-4, 4.51e-4).asDiagonal());
  double arm_length = 0.21;
  /// Generator offsets from the body origin ("+" layout: +x, +y, -x, -y).
  std::array<Vector3d, 4> d{Vector3d(0.21, 0, 0), Vector3d(0, 0.21, 0), Vector3d(-0.21, 0, 0),
                            Vector3d(0, -0.21, 0)};
  double t_max = 2.6;
  double g = 9.81;

  /// Maximum thrust of one generator (four propellers).
  double generator_max_thrust() const { return 4.0 * t_max; }
  double mass() const;

  static std::array<Matrix3d, 4> uniform(const Matrix3d& m) { return {m, m, m, m}; }
};

/// One arm link: the segment from its joint to the next joint along local -z.
struct ArmLinkParams {
  double mass = 0.0;
  Vector3d inertia_diag = Vector3d::Zero();
  double length = 0.0;
};

/// Manipulator parameters: shoulder, elbow and wrist pitch joints about y and a
/// wrist roll about z carrying the gripper. At q = 0 the arm hangs straight down.
struct ArmParams {
  Vector3d mount{0.0, 0.0, -0.04};
  std::array<ArmLinkParams, 4> links{{{0.044, Vector3d(0.22e-4, 0.21e-4, 0.04e-4), 0.08},
                                      {0.040, Vector3d(0.22e-4, 0.19e-4, 0.06e-4), 0.08},
                                      {0.043, Vector3d(0.82e-4, 0.80e-4, 0.15e-4), 0.05},
                                      {0.027, Vector3d(0.05e-4, 0.05e-4, 0.02e-4), 0.04}}};
  std::array<JointLimits, 4> limits{{{-2.0, 2.0}, {-2.4, 2.4}, {-2.0, 2.0}, {-3.2, 3.2}}};
  double vel_limit = 2.0;
  double acc_limit = 6.0;
  /// Reflected rotor inertia added to each diagonal entry of M_M.
  double armature = 2e-3;
  double link_radius = 0.015;
  double gripper_radius = 0.02;
};

/// Geometry of the vehicle for collision checking: two crossed capsules along
/// the generator tubes.
struct VehicleShape {
  double tube_radius = 0.05;
  double tube_half_length = 0.21;
};

/// Rigid payload carried at the tool frame.
struct Payload {
  double mass = 0.0;
  Vector3d com = Vector3d::Zero();
  Matrix3d inertia = Matrix3d::Zero();
};

struct PlatformParams {
  VehicleParams vehicle;
  ArmParams arm;
  VehicleShape shape;

  /// Throws Error when a mass, inertia or geometric parameter is invalid.
  void validate() const;
};

nlohmann::json to_json(const PlatformParams& p);
/// Missing keys keep their default value.
PlatformParams platform_params_from_json(const nlohmann::json& j);
PlatformParams load_platform_params(const std::filesystem::path& path);

inline constexpr std::string_view kBodyLink = "body";
inline constexpr std::string_view kToolLink = "tool";
inline constexpr std::string_view kGripperLink = "gripper";

/// Arm chain rooted at the vehicle body: body, link1, link2, link3, gripper, tool.
/// The body link is massless here; vehicle mass is handled by the vehicle model.
KinematicChain build_arm_chain(const PlatformParams& p, const Payload& payload = {});

/// Arm link pairs never checked for self-collision (their relative motion is
/// bounded by the joint limits).
std::vector<std::pair<std::string, std::string>> arm_collision_exclusions();

/// Virtual base + arm: the 10-DoF robot chain used by the planner.
KinematicChain build_robot_chain(const PlatformParams& p, const VirtualBaseLimits& limits = {});

/// Parameters plus a prebuilt arm chain (and optional payload).
class Platform {
 public:
  explicit Platform(PlatformParams params = {}, Payload payload = {});

  const PlatformParams& params() const { return params_; }
  const Payload& payload() const { return payload_; }
  const KinematicChain& arm_chain() const { return arm_; }
  Platform with_payload(const Payload& payload) const { return Platform(params_, payload); }

  /// Total platform mass including payload.
  double mass() const { return mass_; }

 private:
  PlatformParams params_;
  Payload payload_;
  KinematicChain arm_;
  double mass_ = 0.0;
};

}  // namespace aerovkc
