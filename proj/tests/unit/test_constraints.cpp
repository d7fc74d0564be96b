#include "aerovkc/constraints.hpp"
#include "aerovkc/scenario.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <cmath>

using namespace aerovkc;
using namespace aerovkc::testing;

namespace {

Vector6d pose_error_oracle(const RigidTransform& actual, const RigidTransform& target) {
  const Eigen::AngleAxisd aa(Matrix3d(target.rotation.transpose() * actual.rotation));
  Vector6d e;
  e << actual.translation - target.translation, aa.angle() * aa.axis();
  return e;
}

KinematicChain slider_chain(double radius) {
  Link world;
  world.name = "world";
  Link slider;
  slider.name = "slider";
  if (radius > 0.0) slider.collision_geoms.push_back(CollisionPrimitive::sphere("ball", radius));
  Joint j;
  j.name = "x";
  j.kind = JointKind::prismatic;
  j.axis = Vector3d::UnitX();
  j.limits = {-10.0, 10.0};
  return KinematicChain({world, slider}, {j});
}

const PlannedStep& drawer_open_step() {
  static const std::vector<PlannedStep> plan = [] {
    const Scenario s = builtin_scenario("drawer");
    return execute_sequence(s.scene, {s.steps[0], s.steps[1]}, PlannerConfig{});
  }();
  return plan[1];
}

}  // namespace

TEST(Objective, ConstantTrajectoryIsZero) {
  const StateMatrix x = StateMatrix::Constant(7, 3, 0.4);
  EXPECT_EQ(objective(x, Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(3)), 0.0);
}

TEST(Objective, StraightLineHasNoAccelerationTerm) {
  StateMatrix x(9, 2);
  for (int t = 0; t < 9; ++t) x.row(t) << 0.5 * t, -0.25 * t;
  EXPECT_EQ(objective(x, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, 3.0)), 0.0);
}

TEST(Objective, MatchesHandUnrolledSum) {
  std::mt19937_64 rng(40);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    StateMatrix x(5, 2);
    for (int t = 0; t < 5; ++t) x.row(t) << n(rng), n(rng);
    const Eigen::Vector2d wv(std::abs(n(rng)), std::abs(n(rng))), wa(std::abs(n(rng)), std::abs(n(rng)));
    auto sq = [](double a) { return a * a; };
    double oracle = 0.0;
    for (int i = 0; i < 2; ++i) {
      oracle += sq(wv[i] * (x(1, i) - x(0, i))) + sq(wv[i] * (x(2, i) - x(1, i))) + sq(wv[i] * (x(3, i) - x(2, i))) +
                sq(wv[i] * (x(4, i) - x(3, i)));
      oracle += sq(wa[i] * (x(2, i) - 2 * x(1, i) + x(0, i))) + sq(wa[i] * (x(3, i) - 2 * x(2, i) + x(1, i))) +
                sq(wa[i] * (x(4, i) - 2 * x(3, i) + x(2, i)));
    }
    EXPECT_NEAR(objective(x, wv, wa), oracle, 1e-12);
  }
}

TEST(Objective, InvariantUnderTimeReversal) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> n(0.0, 1.0);
  StateMatrix x(12, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  const StateMatrix reversed = x.colwise().reverse();
  const Eigen::Vector4d wv(1, 2, 0.5, 3), wa(0.1, 1, 2, 0.7);
  EXPECT_NEAR(objective(x, wv, wa), objective(reversed, wv, wa), 1e-12);
}

TEST(ChainConstraint, EmptyWithoutAnchors) {
  const KinematicChain robot = build_robot_chain(PlatformParams{});
  EXPECT_EQ(chain_constraint(robot, ChainState::Zero(robot.dof()), {}).size(), 0);
}

TEST(ChainConstraint, ZeroWhenAnchorMatchesForwardKinematics) {
  const KinematicChain robot = build_robot_chain(PlatformParams{});
  std::mt19937_64 rng(42);
  const ChainState x = random_state(robot, rng);
  const Anchor a{robot.tip_link(), forward_kinematics(robot, x, robot.tip_link())};
  EXPECT_LT(max_abs(chain_constraint(robot, x, {a})), 1e-10);
}

TEST(ChainConstraint, DrawerResidualMatchesPoseErrorOracle) {
  const PlannedStep& step = drawer_open_step();
  const PlanningProblem& p = step.problem;
  ASSERT_EQ(p.anchors.size(), 1u);
  std::mt19937_64 rng(43);
  for (int i = 0; i < 100; ++i) {
    const ChainState x = random_state(p.vkc, rng);
    const RigidTransform actual = forward_kinematics(p.vkc, x, p.anchors[0].link);
    const double oracle = pose_error_oracle(actual, p.anchors[0].pose).norm();
    EXPECT_NEAR(chain_constraint(p.vkc, x, p.anchors).norm(), oracle, 1e-10);
  }
}

TEST(GoalConstraint, AtGoalEqualsMinusTolerance) {
  const KinematicChain robot = build_robot_chain(PlatformParams{});
  GoalSpec g;
  g.joints = ChainState::Constant(robot.dof(), 0.1);
  g.tolerance = 1e-4;
  EXPECT_DOUBLE_EQ(goal_constraint(robot, g.joints, g), -1e-4);
}

TEST(GoalConstraint, JointOffsetSquared) {
  const KinematicChain robot = build_robot_chain(PlatformParams{});
  GoalSpec g;
  g.joints = ChainState::Constant(robot.dof(), 0.1);
  g.tolerance = 1e-4;
  ChainState x = g.joints;
  x[7] += 0.03;
  EXPECT_NEAR(goal_constraint(robot, x, g), 0.03 * 0.03 - 1e-4, 1e-15);
}

TEST(GoalConstraint, EePoseMatchesForwardKinematicsOracle) {
  const KinematicChain robot = build_robot_chain(PlatformParams{});
  std::mt19937_64 rng(44);
  for (int i = 0; i < 50; ++i) {
    GoalSpec g;
    g.kind = GoalKind::ee_pose;
    g.pose = random_transform(rng);
    g.tolerance = 1e-4;
    const ChainState x = random_state(robot, rng);
    // Oracle FK as a product of per-link poses read back from the full pose list.
    const RigidTransform ee = link_poses(robot, x).back();
    const double oracle = pose_error_oracle(ee, g.pose).squaredNorm() - g.tolerance;
    EXPECT_NEAR(goal_constraint(robot, x, g), oracle, 1e-10);
  }
}

TEST(LimitConstraints, AllInsideIsZero) {
  DofLimits l;
  l.x_min = Eigen::Vector2d(-1, -1);
  l.x_max = Eigen::Vector2d(1, 1);
  l.v_max = Eigen::Vector2d(10, 10);
  l.a_max = Eigen::Vector2d(100, 100);
  StateMatrix x(6, 2);
  for (int t = 0; t < 6; ++t) x.row(t) << 0.1 * t, -0.1 * t;
  const LimitResiduals r = limit_constraints(x, l, 0.1);
  EXPECT_EQ(max_abs(r.position) + max_abs(r.velocity) + max_abs(r.acceleration), 0.0);
}

TEST(LimitConstraints, SingleViolation) {
  DofLimits l;
  l.x_min = Eigen::Vector2d(-1, -1);
  l.x_max = Eigen::Vector2d(1, 1);
  l.v_max = Eigen::Vector2d(100, 100);
  l.a_max = Eigen::Vector2d(1e4, 1e4);
  StateMatrix x = StateMatrix::Zero(5, 2);
  x(3, 1) = 1.1;
  const LimitResiduals r = limit_constraints(x, l, 0.1);
  EXPECT_EQ((r.position.array() > 0.0).count(), 1);
  EXPECT_NEAR(r.position(3, 1), 0.1, 1e-12);
}

TEST(LimitConstraints, MatchElementwiseOracle) {
  std::mt19937_64 rng(45);
  std::normal_distribution<double> n(0.0, 1.0);
  const double dt = 0.1;
  for (int trial = 0; trial < 20; ++trial) {
    const int T = 8, dof = 3;
    DofLimits l;
    l.x_min = Eigen::Vector3d::Constant(-0.8);
    l.x_max = Eigen::Vector3d::Constant(0.9);
    l.v_max = Eigen::Vector3d(5, 8, 12);
    l.a_max = Eigen::Vector3d(60, 90, 150);
    StateMatrix x(T, dof);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
    const LimitResiduals r = limit_constraints(x, l, dt);
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < dof; ++i) {
        double over = 0.0;
        if (x(t, i) > l.x_max[i]) over = x(t, i) - l.x_max[i];
        if (x(t, i) < l.x_min[i]) over = l.x_min[i] - x(t, i);
        EXPECT_EQ(r.position(t, i), over);
        if (t + 1 < T) {
          const double speed = std::abs(x(t + 1, i) - x(t, i)) / dt;
          const double v_over = speed > l.v_max[i] ? (speed - l.v_max[i]) * dt : 0.0;
          EXPECT_NEAR(r.velocity(t, i), v_over, 1e-12);
        }
        if (t >= 1 && t + 1 < T) {
          const double acc = std::abs(x(t + 1, i) - 2 * x(t, i) + x(t - 1, i)) / (dt * dt);
          const double a_over = acc > l.a_max[i] ? (acc - l.a_max[i]) * dt * dt : 0.0;
          EXPECT_NEAR(r.acceleration(t - 1, i), a_over, 1e-12);
        }
      }
    }
  }
}

TEST(CollisionConstraints, EmptyWorldHasNoEnvironmentResidual) {
  const KinematicChain robot = build_robot_chain(PlatformParams{});
  ChainState x = ChainState::Zero(robot.dof());
  x[2] = 1.0;
  x[7] = 1.2;
  EXPECT_EQ(collision_constraints(robot, x, {}, {}).env, 0.0);
}

TEST(CollisionConstraints, BoundaryAtSafetyDistance) {
  const KinematicChain c = slider_chain(0.1);
  CollisionWorld w;
  w.obstacles.push_back(CollisionPrimitive::sphere("rock", 0.25, RigidTransform{Matrix3d::Identity(), Vector3d(0.4, 0, 0)}));
  CollisionSettings s;
  s.dist_safe = 0.05;
  ChainState x(1);
  x << 0.0;
  EXPECT_NEAR(collision_constraints(c, x, w, s).env, 0.0, 1e-15);
  x << -0.01;
  EXPECT_EQ(collision_constraints(c, x, w, s).env, 0.0);
  x << 0.02;
  EXPECT_NEAR(collision_constraints(c, x, w, s).env, 0.02, 1e-12);
}

TEST(CollisionConstraints, ClutteredSceneMatchesPairwiseSum) {
  const KinematicChain robot = build_robot_chain(PlatformParams{});
  std::mt19937_64 rng(46);
  std::uniform_real_distribution<double> u(-0.6, 0.6), r(0.03, 0.2);
  CollisionSettings s;
  s.dist_safe = 0.05;
  for (const auto& [a, b] : arm_collision_exclusions()) s.allowed.emplace_back(a, b);
  for (int trial = 0; trial < 10; ++trial) {
    CollisionWorld w;
    for (int k = 0; k < 12; ++k) {
      const RigidTransform pose{random_rotation(rng), Vector3d(u(rng), u(rng), 1.0 + u(rng))};
      const std::string name = "o" + std::to_string(k);
      if (k % 3 == 0) w.obstacles.push_back(CollisionPrimitive::sphere(name, r(rng), pose));
      if (k % 3 == 1) w.obstacles.push_back(CollisionPrimitive::capsule(name, r(rng), r(rng), pose));
      if (k % 3 == 2) w.obstacles.push_back(CollisionPrimitive::box(name, Vector3d(r(rng), r(rng), r(rng)), pose));
    }
    ChainState x = random_state(robot, rng);
    x.head<3>() = Vector3d(0.1 * u(rng), 0.1 * u(rng), 1.0);
    const auto poses = link_poses(robot, x);
    const auto& links = robot.links();
    double env = 0.0, self = 0.0;
    for (std::size_t i = 0; i < links.size(); ++i)
      for (const auto& g : links[i].collision_geoms)
        for (const auto& o : w.obstacles)
          env += std::max(0.0, s.dist_safe - signed_distance(g, poses[i] * g.offset, o, o.offset));
    for (std::size_t i = 0; i < links.size(); ++i)
      for (std::size_t j = i + 2; j < links.size(); ++j) {
        if (pair_allowed(s.allowed, links[i].name, links[j].name)) continue;
        for (const auto& a : links[i].collision_geoms)
          for (const auto& b : links[j].collision_geoms)
            self += std::max(0.0, s.dist_safe - signed_distance(a, poses[i] * a.offset, b, poses[j] * b.offset));
      }
    const CollisionResidual res = collision_constraints(robot, x, w, s);
    EXPECT_NEAR(res.env, env, 1e-9);
    EXPECT_NEAR(res.self, self, 1e-9);
  }
}

TEST(CollisionConstraints, AllowedPairsSkipObstacles) {
  const KinematicChain c = slider_chain(0.1);
  CollisionWorld w;
  w.obstacles.push_back(CollisionPrimitive::sphere("rock", 0.25, RigidTransform{Matrix3d::Identity(), Vector3d(0.3, 0, 0)}));
  CollisionSettings s;
  ChainState x = ChainState::Zero(1);
  EXPECT_GT(collision_constraints(c, x, w, s).env, 0.0);
  s.allowed.emplace_back("slid*", "rock");
  EXPECT_EQ(collision_constraints(c, x, w, s).env, 0.0);
}

TEST(Verify, ReportsEveryFamily) {
  const KinematicChain c = slider_chain(0.0);
  PlanningProblem p(c, ChainState::Zero(1));
  p.T = 4;
  p.goal.joints = ChainState::Constant(1, 1.0);
  StateMatrix x(4, 1);
  x << 0.0, 0.2, 0.4, 0.6;
  const Residuals r = verify(p, x);
  EXPECT_NEAR(r.goal, 0.16 - p.goal.tolerance, 1e-12);
  EXPECT_FALSE(r.feasible(p.collision));
  const auto v = r.verdicts(p.collision);
  ASSERT_EQ(v.size(), 8u);
  EXPECT_EQ(v[2].family, "goal");
  EXPECT_FALSE(v[2].pass);
  x.row(0) << 0.1;
  EXPECT_FALSE(verify(p, x).start_matches);
}
