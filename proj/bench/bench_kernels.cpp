// Serial reference vs OpenMP for the data-parallel kernels.
#include <benchmark/benchmark.h>

#include "sscb/environment.hpp"
#include "sscb/model.hpp"
#include "sscb/optimizer.hpp"
#include "sscb/parallel.hpp"
#include "sscb/policy.hpp"

using namespace sscb;

namespace {

const ToyEnvironment kEnv;
const RewardModel kModel = RewardModel::toy_trig();

void BM_GridScan(benchmark::State& state) {
  const auto exec = static_cast<par::Exec>(state.range(0));
  auto f = [](double x) { return true_objective(kEnv, kModel, ParamVector(std::vector<double>{x})); };
  for (auto _ : state) benchmark::DoNotOptimize(par::evaluate_grid(f, -3.0, 3.0, 1e-4, exec));
}
BENCHMARK(BM_GridScan)->Arg(0)->Arg(1)->ArgNames({"omp"})->Unit(benchmark::kMillisecond);

// IPS gradient draws at x = 0.5 under a uniform policy.
void BM_IpsMoments(benchmark::State& state) {
  const auto exec = static_cast<par::Exec>(state.range(0));
  const ParamVector x(std::vector<double>{0.5});
  auto draw = [&](Rng& rng, std::span<double> out) {
    const std::size_t id = kEnv.sample_context(rng);
    const std::size_t a = rng.index(2);
    const double r = kEnv.sample_reward(id, a, rng);
    const auto g = ips_gradient(kModel.loss_gradient(x, kEnv.context(id), a, r), 0.5);
    out[0] = g[0];
    return true;
  };
  for (auto _ : state)
    benchmark::DoNotOptimize(par::monte_carlo_moments(1, 1 << 20, 7, draw, exec));
}
BENCHMARK(BM_IpsMoments)->Arg(0)->Arg(1)->ArgNames({"omp"})->Unit(benchmark::kMillisecond);

void BM_MismatchFold(benchmark::State& state) {
  const auto exec = static_cast<par::Exec>(state.range(0));
  std::vector<RoundRecord> log(1 << 22);
  Rng rng(3, 0);
  for (std::size_t i = 0; i < log.size(); ++i) {
    log[i].round = i + 1;
    log[i].context_id = static_cast<std::uint32_t>(rng.index(2));
    log[i].action = static_cast<std::uint32_t>(rng.index(2));
  }
  const std::vector<std::uint32_t> greedy{0, 1};
  for (auto _ : state) benchmark::DoNotOptimize(par::count_mismatches(log, greedy, exec));
}
BENCHMARK(BM_MismatchFold)->Arg(0)->Arg(1)->ArgNames({"omp"})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
