#pragma once

#include "aerovkc/collision.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace aerovkc {

class PlanningError : public Error {
 public:
  using Error::Error;
};

enum class GoalKind { ee_pose, joint_target, link_pose };

std::string_view to_string(GoalKind kind);
GoalKind goal_kind_from_string(std::string_view s);

/// Final-state requirement. Pose goals compare FK of `link` (the chain tip for
/// ee_pose) with `pose`; `pose_mask` zeroes ignored components of the 6-D
/// error. Joint goals compare the entries listed in `joint_indices` (all when
/// empty) with `joints`.
struct GoalSpec {
  GoalKind kind = GoalKind::joint_target;
  std::string link;
  RigidTransform pose;
  Vector6d pose_mask = Vector6d::Ones();
  std::vector<int> joint_indices;
  Eigen::VectorXd joints;
  double tolerance = 1e-4;
};

/// Pins `link` of the chain to a world pose (loop closure of a grasped articulated object).
struct Anchor {
  std::string link;
  RigidTransform pose;
};

/// Per-DoF limits. Velocities and accelerations are physical rates; they are
/// compared with finite differences divided by dt and dt^2.
struct DofLimits {
  Eigen::VectorXd x_min, x_max, v_max, a_max;

  static DofLimits from_chain(const KinematicChain& chain);
};

/// Link pair excluded from collision checking. Either side may end in '*' to
/// match a name prefix. Obstacles are matched by the link they came from or,
/// for static obstacles, by their name.
using AllowedPair = std::pair<std::string, std::string>;

struct CollisionSettings {
  double dist_safe = 0.05;
  double xi_dist = 1e-6;
  std::vector<AllowedPair> allowed;
};

struct PlanningProblem {
  PlanningProblem(KinematicChain vkc, ChainState x_start);

  KinematicChain vkc;
  ChainState x_start;
  int T = 30;
  double dt = 0.1;
  Eigen::VectorXd w_v, w_a;
  GoalSpec goal;
  DofLimits limits;
  std::vector<Anchor> anchors;
  CollisionWorld world;
  CollisionSettings collision;
  /// Optional starting point for the goal-seeking IK.
  std::optional<ChainState> ik_hint;

  /// Throws PlanningError when sizes or values are inconsistent.
  void validate() const;
};

/// Default per-DoF weights: 1 for base prismatic, 2 for base revolute, 1 otherwise.
Eigen::VectorXd default_weights(const KinematicChain& chain);

/// Rows are time steps 1..T.
using StateMatrix = Eigen::MatrixXd;

double objective(const StateMatrix& x, const Eigen::VectorXd& w_v, const Eigen::VectorXd& w_a);

Eigen::VectorXd chain_constraint(const KinematicChain& vkc, const ChainState& x, const std::vector<Anchor>& anchors);

/// Stacked goal error; the goal constraint value is its squared norm minus the tolerance.
Eigen::VectorXd goal_error(const KinematicChain& vkc, const ChainState& x, const GoalSpec& goal);
double goal_constraint(const KinematicChain& vkc, const ChainState& x, const GoalSpec& goal);

struct LimitResiduals {
  Eigen::MatrixXd position;      ///< T x dof
  Eigen::MatrixXd velocity;      ///< (T-1) x dof, row t is the step t -> t+1
  Eigen::MatrixXd acceleration;  ///< (T-2) x dof, row t is centred on step t+1
};
LimitResiduals limit_constraints(const StateMatrix& x, const DofLimits& limits, double dt);

bool pair_allowed(const std::vector<AllowedPair>& allowed, std::string_view a, std::string_view b);

struct CollisionResidual {
  double env = 0.0;
  double self = 0.0;
};
CollisionResidual collision_constraints(const KinematicChain& vkc, const ChainState& x, const CollisionWorld& world,
                                        const CollisionSettings& settings);

/// Worst residual per constraint family over a whole trajectory.
struct Residuals {
  double chain = 0.0;       ///< max |h_chain|
  double goal = 0.0;        ///< goal constraint value (feasible when <= 0)
  double position = 0.0;    ///< max hinge violation
  double velocity = 0.0;
  double acceleration = 0.0;
  double env_collision = 0.0;
  double self_collision = 0.0;
  double objective = 0.0;
  bool start_matches = true;

  struct Verdict {
    std::string family;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
  };
  std::vector<Verdict> verdicts(const CollisionSettings& c) const;
  bool feasible(const CollisionSettings& c) const;
};

inline constexpr double kChainTolerance = 1e-4;
inline constexpr double kGoalTolerance = 1e-6;

/// Re-evaluates every constraint of `problem` on `x` with the evaluators above.
Residuals verify(const PlanningProblem& problem, const StateMatrix& x);

}  // namespace aerovkc
