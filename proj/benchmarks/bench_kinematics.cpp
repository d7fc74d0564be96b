#include "aerovkc/platform.hpp"

#include <benchmark/benchmark.h>

using namespace aerovkc;

namespace {

ChainState sample_state() {
  ChainState q = ChainState::Zero(10);
  q << 0.1, -0.2, 1.0, 0.3, -0.2, 0.5, 0.4, -0.6, 0.3, 0.2;
  return q;
}

void BM_ForwardKinematics(benchmark::State& state) {
  const KinematicChain c = build_robot_chain(PlatformParams{});
  const ChainState q = sample_state();
  for (auto _ : state) benchmark::DoNotOptimize(forward_kinematics(c, q, kToolLink));
}
BENCHMARK(BM_ForwardKinematics);

void BM_Jacobian(benchmark::State& state) {
  const KinematicChain c = build_robot_chain(PlatformParams{});
  const ChainState q = sample_state();
  for (auto _ : state) benchmark::DoNotOptimize(jacobian(c, q, kToolLink));
}
BENCHMARK(BM_Jacobian);

}  // namespace
