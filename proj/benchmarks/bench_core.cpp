#include <benchmark/benchmark.h>

#include <vector>

#include "advens/attacks.hpp"
#include "advens/ensemble.hpp"
#include "advens/nn.hpp"
#include "advens/perturb.hpp"

namespace {

using namespace advens;

FeatureVector random_input(std::size_t d, Rng& rng) {
  FeatureVector x(static_cast<Eigen::Index>(d));
  for (auto& c : x) c = uniform01(rng) < 0.3 ? 1.0 : 0.0;
  return x;
}

MlpModel model_for(std::size_t d) { return init_params(std::vector<std::size_t>{d, 160, 160, 2}, 1); }

void BM_Forward(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const MlpModel m = model_for(d);
  Rng rng = make_rng(1);
  const FeatureVector x = random_input(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(forward(m, x));
}
BENCHMARK(BM_Forward)->Arg(100)->Arg(1000)->Arg(10000);

void BM_InputGradient(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const MlpModel m = model_for(d);
  Rng rng = make_rng(2);
  const FeatureVector x = random_input(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(input_gradient(m, x, kMalicious));
}
BENCHMARK(BM_InputGradient)->Arg(100)->Arg(1000)->Arg(10000);

void BM_ParamGradientBatch(benchmark::State& state) {
  const std::size_t d = 1000;
  const MlpModel m = model_for(d);
  Rng rng = make_rng(3);
  std::vector<LabeledExample> batch;
  for (int i = 0; i < state.range(0); ++i) batch.push_back({random_input(d, rng), i % 2});
  for (auto _ : state) benchmark::DoNotOptimize(param_gradient(m, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ParamGradientBatch)->Arg(32)->Arg(128);

void BM_SimplexProject(benchmark::State& state) {
  Rng rng = make_rng(4);
  Eigen::VectorXd v(state.range(0));
  for (auto& c : v) c = standard_normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(simplex_project(v));
}
BENCHMARK(BM_SimplexProject)->Arg(2)->Arg(5)->Arg(64);

void BM_FeasibleNearest(benchmark::State& state) {
  const std::size_t d = 10000;
  Rng rng = make_rng(5);
  const FeatureVector x = random_input(d, rng);
  FeatureVector cont(static_cast<Eigen::Index>(d));
  for (auto& c : cont) c = uniform01(rng);
  const ManipulationSpec spec = default_spec(d, 5);
  for (auto _ : state) benchmark::DoNotOptimize(feasible_nearest(cont, x, spec));
}
BENCHMARK(BM_FeasibleNearest);

void BM_Pgd(benchmark::State& state) {
  const std::size_t d = 1000;
  const MlpModel m = model_for(d);
  Rng rng = make_rng(6);
  const FeatureVector x = random_input(d, rng);
  const ManipulationSpec spec = default_spec(d, 6);
  const auto norm = static_cast<PgdNorm>(state.range(0));
  AttackConfig cfg = attack_preset(norm == PgdNorm::l1 ? AttackMethod::pgd_l1
                                   : norm == PgdNorm::l2 ? AttackMethod::pgd_l2
                                                         : AttackMethod::pgd_linf);
  cfg.iterations = 50;
  for (auto _ : state) benchmark::DoNotOptimize(pgd(m, AttackProblem(x, kMalicious, spec), norm, cfg));
}
BENCHMARK(BM_Pgd)->Arg(static_cast<int>(PgdNorm::l1))->Arg(static_cast<int>(PgdNorm::l2))->Arg(static_cast<int>(PgdNorm::linf));

}  // namespace

BENCHMARK_MAIN();
