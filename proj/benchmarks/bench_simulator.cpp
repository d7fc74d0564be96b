#include "aerovkc/scenario.hpp"
#include "aerovkc/simulator.hpp"

#include <benchmark/benchmark.h>

using namespace aerovkc;

namespace {

void BM_PhysicsStep(benchmark::State& state) {
  const Scenario s = builtin_scenario("drawer");
  const Simulator sim(s.scene, SimConfig{});
  WorldState w = sim.state();
  for (auto _ : state) {
    w = step(sim.model(), w, {w.actuators, Vector4d::Zero()}, 1e-3);
    w.t = 0.0;
  }
}
BENCHMARK(BM_PhysicsStep);

// One high-level period: ten physics steps, noise, delay and both control levels.
void BM_ControllerTick(benchmark::State& state) {
  const Scenario s = builtin_scenario("task1");
  Simulator sim(s.scene, SimConfig{});
  const RobotReference ref = RobotReference::hold(s.scene.robot_start);
  for (auto _ : state) sim.tick(ref);
}
BENCHMARK(BM_ControllerTick);

}  // namespace
