#include "aerovkc/solver.hpp"
#include "aerovkc/platform.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace aerovkc;
using namespace aerovkc::testing;

namespace {

KinematicChain slider_chain(double vel_limit = 100.0) {
  Link world;
  world.name = "world";
  Link slider;
  slider.name = "slider";
  Joint j;
  j.name = "x";
  j.kind = JointKind::prismatic;
  j.axis = Vector3d::UnitX();
  j.limits = {-10.0, 10.0};
  j.vel_limit = vel_limit;
  j.acc_limit = 1000.0;
  return KinematicChain({world, slider}, {j});
}

PlanningProblem line_problem(double goal) {
  PlanningProblem p(slider_chain(), ChainState::Zero(1));
  p.T = 10;
  p.dt = 0.1;
  p.w_v = Eigen::VectorXd::Ones(1);
  p.w_a = Eigen::VectorXd::Zero(1);
  p.goal.joints = ChainState::Constant(1, goal);
  return p;
}

}  // namespace

TEST(Solve, StartEqualsGoalGivesConstantTrajectory) {
  const KinematicChain robot = build_robot_chain(PlatformParams{});
  ChainState x0 = ChainState::Zero(robot.dof());
  x0[2] = 1.0;
  x0[9] = 0.5;
  PlanningProblem p(robot, x0);
  p.goal.joints = x0;
  for (const auto& [a, b] : arm_collision_exclusions()) p.collision.allowed.emplace_back(a, b);
  const SolveResult r = solve(p);
  ASSERT_TRUE(r.success) << r.report;
  EXPECT_EQ(r.trajectory.states.rows(), p.T);
  for (Eigen::Index t = 0; t < r.trajectory.states.rows(); ++t)
    EXPECT_LT(max_abs(r.trajectory.states.row(t).transpose() - x0), 1e-9);
  EXPECT_LT(r.trajectory.residuals.objective, 1e-12);
}

TEST(Solve, OneDofPathLengthOptimumIsStraightLine) {
  const PlanningProblem p = line_problem(1.0);
  const SolveResult r = solve(p);
  ASSERT_TRUE(r.success) << r.report;
  const StateMatrix& x = r.trajectory.states;
  ASSERT_EQ(x.rows(), 10);
  const double x_T = x(9, 0);
  for (int t = 0; t < 10; ++t) EXPECT_NEAR(x(t, 0), x_T * t / 9.0, 1e-8);
  // Closed form: nine equal increments of 1/9.
  EXPECT_NEAR(objective(x, p.w_v, p.w_a), 1.0 / 9.0, 1e-8);
  EXPECT_NEAR(x_T, 1.0, 1e-8);
}

TEST(Solve, FirstRowIsStart) {
  PlanningProblem p = line_problem(-0.7);
  p.x_start << 0.3;
  const SolveResult r = solve(p);
  ASSERT_TRUE(r.success) << r.report;
  EXPECT_EQ(r.trajectory.states(0, 0), 0.3);
  EXPECT_TRUE(r.trajectory.residuals.start_matches);
}

TEST(Solve, ResultPassesIndependentVerification) {
  const PlanningProblem p = line_problem(2.0);
  const SolveResult r = solve(p);
  ASSERT_TRUE(r.success) << r.report;
  const Residuals v = verify(p, r.trajectory.states);
  EXPECT_TRUE(v.feasible(p.collision));
  EXPECT_EQ(v.position + v.velocity + v.acceleration, 0.0);
}

TEST(Solve, UnreachableGoalReportsFailingFamily) {
  // Ten knots at 1 m/s and dt 0.1 cannot cover 5 m.
  PlanningProblem p(slider_chain(1.0), ChainState::Zero(1));
  p.T = 10;
  p.goal.joints = ChainState::Constant(1, 5.0);
  const SolveResult r = solve(p);
  EXPECT_FALSE(r.success);
  EXPECT_NE(r.report.find("goal"), std::string::npos) << r.report;
}

TEST(Solve, MalformedProblemThrows) {
  PlanningProblem p = line_problem(1.0);
  p.T = 1;
  EXPECT_THROW(solve(p), PlanningError);
  p = line_problem(1.0);
  p.w_v = Eigen::VectorXd::Ones(3);
  EXPECT_THROW(solve(p), PlanningError);
}

TEST(Solve, Deterministic) {
  const PlanningProblem p = line_problem(1.5);
  const SolveResult a = solve(p), b = solve(p);
  EXPECT_EQ(a.trajectory.states, b.trajectory.states);
}

TEST(IkSeed, ReachesPoseGoal) {
  const KinematicChain robot = build_robot_chain(PlatformParams{});
  ChainState x0 = ChainState::Zero(robot.dof());
  x0[2] = 1.0;
  ChainState target = x0;
  target.head<3>() += Vector3d(0.3, -0.2, 0.1);
  target[5] = 0.4;
  target[7] = 0.6;
  PlanningProblem p(robot, x0);
  p.goal.kind = GoalKind::ee_pose;
  p.goal.pose = forward_kinematics(robot, target, robot.tip_link());
  const ChainState seed = ik_seed(p);
  EXPECT_LT(goal_error(robot, seed, p.goal).norm(), 1e-6);
  EXPECT_TRUE(robot.within_limits(seed));
}
