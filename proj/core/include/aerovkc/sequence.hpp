#pragma once

#include "aerovkc/platform.hpp"
#include "aerovkc/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace aerovkc {

/// Region of an object that counts as "inside" (a box in the frame of `link`).
struct ContainerVolume {
  std::string link;
  RigidTransform offset;
  Vector3d half_extents = Vector3d::Zero();
};

/// Manipulable scene object. Link and joint names carry the prefix "<name>/".
/// The chain runs from the fixed base (root) to the attachable link (tip).
struct SceneObject {
  std::string name;
  KinematicChain chain;
  RigidTransform base_pose;
  ChainState q;
  /// Pose of the attachable link in the tool frame while grasped.
  RigidTransform grasp_offset;
  double damping = 0.5;
  double friction = 0.02;
  /// Rigid objects (no DoF) are carried along when grasped; articulated ones stay anchored.
  bool movable = false;
  std::optional<ContainerVolume> container;

  SceneObject(std::string name, KinematicChain chain);
  const std::string& handle_link() const { return chain.tip_link(); }
};

struct Scene {
  PlatformParams platform;
  VirtualBaseLimits base_limits;
  CollisionWorld world;
  std::vector<SceneObject> objects;
  ChainState robot_start;

  int object_index(std::string_view name) const;
};

/// Evolving configuration of a scene during a sequence.
struct SceneState {
  ChainState robot;
  std::vector<ChainState> object_q;
  std::vector<RigidTransform> object_base;
  std::optional<int> attached;
  /// Handle pose in the tool frame recorded when the object was attached.
  RigidTransform grasp;
  /// Released objects resting in another object's container move with it.
  struct Parent {
    int object = -1;
    std::string link;
    RigidTransform offset;
  };
  std::vector<std::optional<Parent>> parent;

  static SceneState initial(const Scene& scene);
};

/// True when `p` (world frame) lies inside the container volume of object `k`.
bool inside_container(const Scene& scene, const SceneState& state, int k, const Vector3d& p);

enum class PreAction { none, attach, detach };
std::string_view to_string(PreAction a);
PreAction pre_action_from_string(std::string_view s);

/// Unresolved goal of a task step; resolved against the scene state when the step is planned.
struct StepGoal {
  GoalKind kind = GoalKind::joint_target;
  /// link_pose: link name; with `grasp_object` set the tool is sent to that object's grasp pose.
  std::string link;
  std::string grasp_object;
  RigidTransform pose;
  Vector6d mask = Vector6d::Ones();
  /// joint_target: named joints; object joints use the object's own sign convention.
  std::vector<std::pair<std::string, double>> joints;
  double tolerance = 1e-4;
};

struct TaskStep {
  std::string name;
  PreAction pre_action = PreAction::none;
  std::string object;
  StepGoal goal;
  std::vector<AllowedPair> allowed;
  /// Optional IK start for the ten robot DoF.
  std::optional<Eigen::VectorXd> robot_hint;
};

/// Planner defaults shared by all steps.
struct PlannerConfig {
  int T = 30;
  double dt = 0.1;
  CollisionSettings collision;
  double w_base_linear = 1.0;
  double w_base_angular = 2.0;
  double w_arm = 1.0;
  double w_object = 1.0;
  SolverOptions solver;
};

class SequenceError : public PlanningError {
 public:
  SequenceError(int step, const std::string& what);
  int step() const { return step_; }

 private:
  int step_;
};

/// Active VKC and start state for the current scene state.
struct ActiveChain {
  KinematicChain vkc;
  ChainState x;
};
ActiveChain active_chain(const Scene& scene, const SceneState& state);

/// World obstacles plus every object that is not currently grasped, posed at its state.
CollisionWorld scene_world(const Scene& scene, const SceneState& state);

/// World pose of an object link at the given state.
RigidTransform object_link_pose(const Scene& scene, const SceneState& state, int object, std::string_view link);

/// Applies the step's pre-action and builds its planning problem.
PlanningProblem build_problem(const Scene& scene, SceneState& state, const TaskStep& step, const PlannerConfig& cfg);

/// Reads back robot and object states from the final VKC state of a step.
void apply_final_state(const Scene& scene, SceneState& state, const KinematicChain& vkc, const ChainState& x_T);

struct PlannedStep {
  std::string name;
  PlanningProblem problem;
  Trajectory trajectory;
  std::optional<int> attached;
  SceneState state_before;
  SceneState state_after;
};

/// Plans every step in order. Throws SequenceError naming the step and its residual report.
std::vector<PlannedStep> execute_sequence(const Scene& scene, const std::vector<TaskStep>& steps,
                                          const PlannerConfig& cfg);

}  // namespace aerovkc
