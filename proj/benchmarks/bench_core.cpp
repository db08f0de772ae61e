#include <benchmark/benchmark.h>

#include "zoqn/gradients.hpp"
#include "zoqn/problems.hpp"
#include "zoqn/solver.hpp"

using namespace zoqn;

static void BM_RealizeNoise(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        realize_noise(SampleId{1, i++}, dim, NoiseDistribution::Gaussian, 1e-3));
  }
}
BENCHMARK(BM_RealizeNoise)->Arg(8)->Arg(45)->Arg(92);

static void BM_TwoLoop(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  LbfgsMemory memory(10, CurvatureMode::Smooth);
  std::uint64_t draw = 0;
  while (memory.size() < 10) {
    Eigen::VectorXd s =
        realize_noise(SampleId{3, draw++}, dim, NoiseDistribution::Gaussian, 1.0);
    Eigen::VectorXd y =
        s + realize_noise(SampleId{3, draw++}, dim, NoiseDistribution::Gaussian, 0.3);
    memory.try_store(s, y, 1e-3, 0.0, 0.0);
  }
  const Eigen::VectorXd g =
      realize_noise(SampleId{4, 0}, dim, NoiseDistribution::Gaussian, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(memory.two_loop(g));
  }
}
BENCHMARK(BM_TwoLoop)->Arg(11)->Arg(30)->Arg(50);

static void BM_FdGradientBatch(benchmark::State& state) {
  const ProblemSpec spec = make_problem("chebyquad", NoiseModel::Abs, 1e-3);
  const Eigen::VectorXd x = initial_point(spec);
  EvalCounter counter;
  std::uint64_t next = 0;
  for (auto _ : state) {
    const SampleSet set = draw_set(7, static_cast<std::size_t>(state.range(0)), next);
    benchmark::DoNotOptimize(fd_gradient_batch(spec, x, set, 1e-8, counter));
  }
}
BENCHMARK(BM_FdGradientBatch)->Arg(2)->Arg(8);

static void BM_SolverIterations(benchmark::State& state) {
  const ProblemSpec spec = make_problem("chebyquad", NoiseModel::Abs, 1e-3);
  for (auto _ : state) {
    SolverConfig config;
    config.policy.kind = SampleTestKind::Ipqn;
    config.gamma = 0.9;
    config.run_seed = 11;
    config.budgets.max_evals = 5000;
    benchmark::DoNotOptimize(run_fd_lbfgs(spec, config, 0.0));
  }
}
BENCHMARK(BM_SolverIterations);

BENCHMARK_MAIN();
