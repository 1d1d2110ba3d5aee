#include <benchmark/benchmark.h>

#include <vector>

#include "legsim/gait.hpp"
#include "legsim/mlp.hpp"
#include "legsim/policy.hpp"
#include "legsim/ppo.hpp"
#include "legsim/rng.hpp"
#include "legsim/sim.hpp"
#include "legsim/terrain.hpp"

using namespace legsim;

static void BM_SampleFrame(benchmark::State& state) {
  const GaitParams g;
  double tau = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_frame(g, tau));
    tau += 0.01;
  }
}
BENCHMARK(BM_SampleFrame);

static void BM_GenerateRlTerrain(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_rl_terrain(6.0, 10.0, 3.0, seed++));
}
BENCHMARK(BM_GenerateRlTerrain);

static void BM_RunCycle(benchmark::State& state) {
  const HeightField h = generate_rl_terrain(static_cast<double>(state.range(0)), 10.0, 3.0, 1);
  const RobotConfig cfg;
  const GaitParams g;
  SimOptions options;
  options.record_contacts = false;
  for (auto _ : state) {
    SimState s = start_state(h, cfg);
    benchmark::DoNotOptimize(run_cycle(s, cfg, g, h, options));
  }
}
BENCHMARK(BM_RunCycle)->Arg(0)->Arg(4)->Arg(8);

static void BM_SolveTwist(benchmark::State& state) {
  Rng rng(1);
  std::vector<FootConstraint> cs(static_cast<std::size_t>(state.range(0)));
  for (auto& c : cs) {
    c.point = {rng.uniform(-1, 0.1), rng.uniform(-0.2, 0.2)};
    c.command = {rng.uniform(-0.1, 0.0), rng.uniform(-0.02, 0.02)};
  }
  for (auto _ : state) benchmark::DoNotOptimize(solve_twist(cs, BodyPose{}));
}
BENCHMARK(BM_SolveTwist)->Arg(8)->Arg(17);

static void BM_MlpForward(benchmark::State& state) {
  Rng rng(2);
  Mlp net({4, 64, 64, 3});
  net.initialize(rng, 1.0);
  const std::vector<double> x{0.1, -0.2, 0.3, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_MlpForward);

static void BM_MlpBackward(benchmark::State& state) {
  Rng rng(3);
  Mlp net({4, 64, 64, 3});
  net.initialize(rng, 1.0);
  const std::vector<double> x{0.1, -0.2, 0.3, 0.5};
  const std::vector<double> g_out{1.0, -0.5, 0.25};
  std::vector<double> grad(net.parameter_count());
  Mlp::Cache cache;
  net.forward(x, cache);
  for (auto _ : state) benchmark::DoNotOptimize(net.backward(cache, g_out, grad));
}
BENCHMARK(BM_MlpBackward);

static void BM_PpoObjectiveGradient(benchmark::State& state) {
  Rng rng(4);
  const PolicyParams p = PolicyParams::initial(0);
  SampleBatch batch;
  for (int i = 0; i < 64; ++i) {
    const Observation obs{rng.uniform(0, 0.6), rng.uniform(0, 0.4), rng.uniform(0.1, 0.6),
                          rng.uniform(0, 1)};
    const auto mean = policy_mean(p, obs);
    batch.observations.push_back(obs.as_array());
    batch.actions.push_back(mean);
    batch.old_log_probs.push_back(gaussian_log_prob(mean, mean, p.log_std));
    batch.advantages.push_back(rng.normal());
    batch.returns.push_back(rng.normal());
  }
  std::vector<double> grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ppo_objective(p, batch, 0.2, 0.5, 0.01, &grad));
  }
}
BENCHMARK(BM_PpoObjectiveGradient);

BENCHMARK_MAIN();
