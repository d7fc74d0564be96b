#include "aerovkc/scenario.hpp"

#include <benchmark/benchmark.h>

using namespace aerovkc;

namespace {

void BM_CollisionConstraints(benchmark::State& state) {
  const Scenario s = builtin_scenario("task2");
  const SceneState st = SceneState::initial(s.scene);
  const ActiveChain a = active_chain(s.scene, st);
  const CollisionWorld w = scene_world(s.scene, st);
  for (auto _ : state) benchmark::DoNotOptimize(collision_constraints(a.vkc, a.x, w, CollisionSettings{}));
}
BENCHMARK(BM_CollisionConstraints);

// Plans the first step of each built-in scenario.
void BM_SolveFirstStep(benchmark::State& state) {
  const Scenario s = builtin_scenario(builtin_scenario_names()[static_cast<std::size_t>(state.range(0))]);
  const PlannerConfig cfg;
  for (auto _ : state) {
    SceneState st = SceneState::initial(s.scene);
    const PlanningProblem p = build_problem(s.scene, st, s.steps.front(), cfg);
    benchmark::DoNotOptimize(solve(p, cfg.solver));
  }
  state.SetLabel(s.name);
}
BENCHMARK(BM_SolveFirstStep)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace
