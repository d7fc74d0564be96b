#include "aerovkc/scenario.hpp"
#include "aerovkc/simulator.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

using namespace aerovkc;
using namespace aerovkc::testing;

namespace {

SimConfig quiet_config() {
  SimConfig c;
  c.noise = {0.0, 0.0};
  return c;
}

Scene empty_scene() {
  Scene s = builtin_scenario("task1").scene;
  s.objects.clear();
  s.world.obstacles.clear();
  return s;
}

// The translational state of the vehicle model is the composite centre of mass.
Vector3d system_momentum(const Platform& platform, const WorldState& s) { return platform.mass() * s.vehicle.v; }

}  // namespace

TEST(SimConfig, RateContract) {
  const SimConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.high_period(), 10);
  EXPECT_EQ(c.low_period(), 2);
  EXPECT_EQ(c.delay_ticks(), 2);
}

TEST(SimConfig, RejectsIncompatibleRates) {
  SimConfig c;
  c.high_rate = 300.0;
  EXPECT_THROW(c.validate(), SimulationError);
  c = SimConfig{};
  c.delay = 0.015;
  EXPECT_THROW(c.validate(), SimulationError);
  c = SimConfig{};
  c.low_rate = 150.0;
  EXPECT_THROW(c.validate(), SimulationError);
}

TEST(DelayLine, ShiftsByItsLength) {
  DelayLine<int> d(2, -1);
  std::vector<int> out;
  for (int i = 0; i < 6; ++i) out.push_back(d.push(i));
  EXPECT_EQ(out, (std::vector<int>{-1, -1, 0, 1, 2, 3}));
  DelayLine<int> none(0, -1);
  EXPECT_EQ(none.push(5), 5);
}

TEST(InjectNoise, ZeroStdIsIdentity) {
  std::mt19937_64 rng(50);
  Measurement m;
  m.p = Vector3d(1, 2, 3);
  m.R = random_rotation(rng);
  const Measurement out = inject_noise(m, {0.0, 0.0}, rng);
  EXPECT_EQ(out.p, m.p);
  EXPECT_LT(max_abs(out.R - m.R), 1e-15);
}

TEST(InjectNoise, SeededSequenceIsRepeatable) {
  std::mt19937_64 a(7), b(7);
  Measurement m;
  for (int i = 0; i < 100; ++i) {
    const Measurement x = inject_noise(m, {1e-3, 1e-3}, a), y = inject_noise(m, {1e-3, 1e-3}, b);
    ASSERT_EQ(x.p, y.p);
    ASSERT_EQ(x.R, y.R);
  }
}

TEST(ReferenceTrack, HitsKnotsWithZeroEndVelocity) {
  Eigen::MatrixXd knots(4, 2);
  knots << 0, 1, 1, 1, 3, 0, 4, -1;
  const ReferenceTrack track(knots, 0.5);
  EXPECT_DOUBLE_EQ(track.duration(), 1.5);
  Eigen::VectorXd x, xd, xdd;
  for (int k = 0; k < 4; ++k) {
    track.sample(0.5 * k, x, xd, xdd);
    EXPECT_LT(max_abs(x - knots.row(k).transpose()), 1e-12);
  }
  track.sample(0.0, x, xd, xdd);
  EXPECT_LT(max_abs(xd), 1e-12);
  track.sample(1.5, x, xd, xdd);
  EXPECT_LT(max_abs(xd), 1e-12);
  track.sample(9.0, x, xd, xdd);
  EXPECT_LT(max_abs(x - knots.row(3).transpose()), 1e-12);
}

TEST(Step, ZeroThrustFallsAtGravity) {
  const Simulator sim(empty_scene(), quiet_config());
  WorldState s = sim.state();
  s.actuators = ThrustCommand{};
  const WorldState next = step(sim.model(), s, {s.actuators, Vector4d::Zero()}, 1e-3);
  const double g = sim.model().platform.params().vehicle.g;
  EXPECT_NEAR((next.vehicle.v.z() - s.vehicle.v.z()) / 1e-3, -g, 1e-9);
  EXPECT_NEAR(next.vehicle.v.x(), 0.0, 1e-12);
}

TEST(Step, HoverInputIsEquilibrium) {
  const Simulator sim(empty_scene(), quiet_config());
  const WorldState& s = sim.state();
  const ArmTerms terms = arm_dynamics_terms(sim.model().platform, s.arm,
                                            s.vehicle.R.transpose() * Vector3d(0, 0, -sim.model().platform.params().vehicle.g));
  const WorldState next = step(sim.model(), s, {s.actuators, terms.G}, 1e-3);
  EXPECT_LT((next.vehicle.p - s.vehicle.p).norm(), 1e-9);
  EXPECT_LT(next.vehicle.v.norm(), 1e-9);
  EXPECT_LT(next.vehicle.omega.norm(), 1e-9);
  EXPECT_LT((next.arm.q - s.arm.q).norm() + next.arm.qd.norm(), 1e-9);
}

TEST(Step, MomentumConservedWithoutGravityOrInput) {
  Scene scene = empty_scene();
  scene.platform.vehicle.g = 0.0;
  const Simulator sim(scene, quiet_config());
  WorldState s = sim.state();
  s.actuators = ThrustCommand{};
  s.vehicle.v = Vector3d(0.3, -0.2, 0.1);
  s.vehicle.omega = Vector3d(0.2, 0.1, -0.3);
  const Vector3d p0 = system_momentum(sim.model().platform, s);
  for (int i = 0; i < 10000; ++i) s = step(sim.model(), s, {s.actuators, Vector4d::Zero()}, 1e-3);
  EXPECT_LT((system_momentum(sim.model().platform, s) - p0).norm(), 1e-8);
}

TEST(Step, NonFiniteStateThrows) {
  const Simulator sim(empty_scene(), quiet_config());
  WorldState s = sim.state();
  s.vehicle.v.x() = std::nan("");
  EXPECT_THROW(step(sim.model(), s, {s.actuators, Vector4d::Zero()}, 1e-3), SimulationError);
}

TEST(Simulator, TickRunsTheHighLevelPeriod) {
  Simulator sim(empty_scene(), quiet_config());
  sim.tick(RobotReference::hold(empty_scene().robot_start));
  EXPECT_NEAR(sim.time(), 0.01, 1e-12);
}

TEST(Simulator, EmptyPlanLogsHoverOnly) {
  Scenario s = builtin_scenario("task1");
  s.steps.clear();
  const SimLog log = simulate_plan(s, {}, quiet_config());
  EXPECT_TRUE(log.completed);
  ASSERT_FALSE(log.rows.empty());
  const auto t = log.series("t");
  EXPECT_NEAR(t.back(), SimConfig{}.hold_time, 0.011);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_NEAR(t[i] - t[i - 1], 0.01, 1e-9);
  for (const char* dof : {"base_x", "base_y", "base_z", "shoulder"}) {
    const auto ref = log.series(std::string("ref_") + dof), act = log.series(std::string("act_") + dof);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      EXPECT_EQ(ref[i], ref[0]) << dof;
      EXPECT_NEAR(act[i], ref[0], 1e-6) << dof;
    }
  }
  EXPECT_EQ(log.series("attached"), std::vector<double>(t.size(), -1.0));
}

TEST(Simulator, DrawerFollowsQuasiStaticGripper) {
  // Gripper placed on the drawer handle, then moved slowly along the slide.
  const Scenario sc = builtin_scenario("drawer");
  const auto approach = execute_sequence(sc.scene, {sc.steps[0]}, PlannerConfig{});
  const ChainState x = approach[0].state_after.robot;
  Simulator sim(sc.scene, quiet_config());
  WorldState s = sim.state();
  s.vehicle = VehicleState::from_rpy(base_position(x), base_rpy(x));
  s.arm.q = x.segment<4>(6);
  sim.reset(s);
  const int drawer = sc.scene.object_index("drawer");
  ASSERT_TRUE(sim.try_attach(drawer));
  const SceneObject& obj = sc.scene.objects[static_cast<std::size_t>(drawer)];
  const Vector3d axis = obj.base_pose.rotation * obj.chain.joints().front().axis;
  const double pull = 0.15, speed = 0.02;
  const Vector3d p0 = s.vehicle.p;
  const double q0 = s.object_q[static_cast<std::size_t>(drawer)][0];
  WorldState w = sim.state();
  const double move = pull / speed, settle = 3.0, dt = 1e-3;
  for (int i = 0; i * dt < move + settle; ++i) {
    const double t = std::min(i * dt, move);
    w.vehicle.p = p0 + axis * (speed * t);
    w.vehicle.v = i * dt < move ? Vector3d(axis * speed) : Vector3d::Zero();
    w.vehicle.R = s.vehicle.R;
    w.vehicle.omega.setZero();
    w.arm = s.arm;
    w = step(sim.model(), w, {w.actuators, Vector4d::Zero()}, dt);
  }
  const double dq = w.object_q[static_cast<std::size_t>(drawer)][0] - q0;
  EXPECT_NEAR(dq, pull, 2e-3);
}

TEST(SimLog, CsvHeaderAndEvents) {
  Scenario s = builtin_scenario("task1");
  s.steps.clear();
  SimConfig c = quiet_config();
  c.hold_time = 0.1;
  const SimLog log = simulate_plan(s, {}, c);
  const auto dir = std::filesystem::temp_directory_path() / "aerovkc_simlog_test";
  std::filesystem::create_directories(dir);
  log.write_csv(dir / "log.csv");
  std::ifstream in(dir / "log.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("t,step,attached,ref_base_x,act_base_x", 0), 0u) << header;
  const nlohmann::json ev = log.events_json();
  EXPECT_TRUE(ev.at("completed").get<bool>());
  EXPECT_EQ(ev.at("events").back().at("type"), "done");
  EXPECT_THROW(log.column("nope"), SimulationError);
  std::filesystem::remove_all(dir);
}
