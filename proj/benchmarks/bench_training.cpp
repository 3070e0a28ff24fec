#include <benchmark/benchmark.h>

#include "rsched/optim.hpp"

namespace {

void BM_IbrEpochs(benchmark::State& state) {
  const auto epochs = static_cast<std::size_t>(state.range(0));
  rsched::Task task(rsched::QuadraticMeans{{0.0, 0.0, 1.0}, 0.1, {100, 100, 100}});
  rsched::GroupedDataset data = task.generate(1);
  const rsched::ChiSquareBall ball(0.1, data.train_frequencies());
  for (auto _ : state) {
    rsched::IbrOptions opt;
    opt.schedule = rsched::StepDecay{0.01, 0, 300, 0.95};
    opt.epochs = epochs;
    opt.seed = 3;
    auto result = rsched::ibr_train(task, data, ball, opt);
    benchmark::DoNotOptimize(result.params.theta.data());
  }
}
BENCHMARK(BM_IbrEpochs)->Arg(1)->Arg(10);

void BM_PrimalDualSteps(benchmark::State& state) {
  const auto steps = static_cast<std::uint64_t>(state.range(0));
  rsched::Task task(rsched::QuadraticMeans{{0.0, 0.0, 1.0}, 0.1, {100, 100, 100}});
  rsched::GroupedDataset data = task.generate(1);
  const rsched::ChiSquareBall ball(0.1, data.train_frequencies());
  for (auto _ : state) {
    rsched::PrimalDualOptions opt;
    opt.schedule = rsched::StepDecay{0.01, 0, 300, 0.95};
    opt.steps = steps;
    opt.q_step = 0.05;
    opt.seed = 3;
    auto result = rsched::primal_dual_train(task, data, ball, opt);
    benchmark::DoNotOptimize(result.params.theta.data());
  }
}
BENCHMARK(BM_PrimalDualSteps)->Arg(300)->Arg(3000);

}  // namespace

BENCHMARK_MAIN();
