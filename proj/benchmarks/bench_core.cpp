#include <benchmark/benchmark.h>

#include "dce/design.hpp"
#include "dce/mmnl.hpp"
#include "dce/mnl.hpp"
#include "dce/simulate.hpp"

namespace {

using namespace dce;

const BlockedDesign& design() {
  static const BlockedDesign d = block_design(select_fraction(default_schema(), 64, 1, 20000), 8, 1);
  return d;
}

CodedPanel panel(std::size_t n) {
  SimConfig cfg;
  cfg.schema = default_schema();
  cfg.design = design();
  cfg.true_params = Eigen::VectorXd::Constant(38, 0.1);
  cfg.n_respondents = n;
  return code_dataset(simulate_dataset(cfg), build_parameter_index(cfg.schema));
}

void BM_MnlLoglikGradient(benchmark::State& state) {
  const auto p = panel(528);
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(38, 0.05);
  Eigen::VectorXd g;
  for (auto _ : state) benchmark::DoNotOptimize(mnl_loglik_gradient(b, p, g, static_cast<unsigned>(state.range(0))));
}
BENCHMARK(BM_MnlLoglikGradient)->Arg(1)->Arg(4)->Unit(benchmark::kMicrosecond);

void BM_MslLoglikGradient(benchmark::State& state) {
  const auto p = panel(528);
  MixingSpec mixing;
  mixing.halton.n_draws = static_cast<std::size_t>(state.range(0));
  const auto index = build_parameter_index(default_schema(), mixing);
  const auto draws = make_msl_draws(mixing, p.respondents.size());
  Eigen::VectorXd params = Eigen::VectorXd::Constant(40, 0.05);
  params.tail(2).setConstant(0.8);
  Eigen::VectorXd g;
  for (auto _ : state) benchmark::DoNotOptimize(msl_loglik_gradient(params, p, index, draws, g));
}
BENCHMARK(BM_MslLoglikGradient)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_HaltonDraws(benchmark::State& state) {
  MixingSpec mixing;
  for (auto _ : state) benchmark::DoNotOptimize(make_msl_draws(mixing, 528));
}
BENCHMARK(BM_HaltonDraws)->Unit(benchmark::kMillisecond);

void BM_SelectFraction(benchmark::State& state) {
  const auto s = default_schema();
  for (auto _ : state) benchmark::DoNotOptimize(select_fraction(s, 64, 1, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_SelectFraction)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  SimConfig cfg;
  cfg.schema = default_schema();
  cfg.design = design();
  cfg.true_params = Eigen::VectorXd::Constant(38, 0.1);
  cfg.n_respondents = 528;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_dataset(cfg));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
