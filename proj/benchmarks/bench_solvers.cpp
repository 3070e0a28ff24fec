#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "rsched/solvers.hpp"
#include "rsched/types.hpp"

namespace {

std::vector<double> make_losses(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

void BM_BestResponseChiSquare(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const rsched::ChiSquareBall ball(0.1, rsched::GroupWeights::uniform(n));
  const rsched::GroupLosses v(make_losses(n, 42));
  for (auto _ : state) {
    auto br = rsched::best_response(v, ball);
    benchmark::DoNotOptimize(br.objective);
  }
}
BENCHMARK(BM_BestResponseChiSquare)->Arg(3)->Arg(8)->Arg(64)->Arg(512);

void BM_BestResponseCVaR(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const rsched::CVaR set(0.3, rsched::GroupWeights::uniform(n));
  const rsched::GroupLosses v(make_losses(n, 42));
  for (auto _ : state) {
    auto br = rsched::best_response(v, set);
    benchmark::DoNotOptimize(br.objective);
  }
}
BENCHMARK(BM_BestResponseCVaR)->Arg(3)->Arg(8)->Arg(64)->Arg(512);

void BM_ProjectChiSquare(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const rsched::ChiSquareBall ball(0.1, rsched::GroupWeights::uniform(n));
  const std::vector<double> v = make_losses(n, 7);
  for (auto _ : state) {
    auto q = rsched::project_chi_square(v, ball);
    benchmark::DoNotOptimize(q.values().data());
  }
}
BENCHMARK(BM_ProjectChiSquare)->Arg(3)->Arg(8)->Arg(64)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
