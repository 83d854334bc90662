#include <benchmark/benchmark.h>

#include "mspec/meta/meta.hpp"
#include "mspec/rl/trajectory.hpp"

using namespace mspec;

namespace {

env::NetworkConfig default_cfg() { return env::NetworkConfig{}; }

env::TaskSpec default_task(const env::NetworkConfig& cfg) {
  return env::sample_task(env::TaskDistParams{}, cfg, 7);
}

void BM_EnvStep(benchmark::State& state) {
  const env::NetworkConfig cfg = default_cfg();
  const env::TaskSpec task = default_task(cfg);
  Rng rng(1);
  env::Env e(cfg, task);
  e.reset(rng);
  env::AllocationAction a;
  a.levels = Grid<int>(cfg.n_bs, cfg.n_bands, 3);
  for (auto _ : state) {
    if (e.done()) e.reset(rng);
    benchmark::DoNotOptimize(e.step(a, rng));
  }
}
BENCHMARK(BM_EnvStep);

void policy_forward_bench(benchmark::State& state, nn::ArchKind kind) {
  const env::NetworkConfig cfg = default_cfg();
  const nn::PolicyDims dims = rl::policy_dims(cfg);
  nn::ArchSpec spec;
  spec.kind = kind;
  const nn::ParamSet params = nn::init_params(spec, dims, 3);
  const std::vector<std::vector<double>> seq(
      8, std::vector<double>(dims.obs_dim, 0.1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nn::policy_forward(seq, params, spec, dims));
  }
}

void BM_PolicyForwardMlp(benchmark::State& state) {
  policy_forward_bench(state, nn::ArchKind::kMlp);
}
BENCHMARK(BM_PolicyForwardMlp);

void BM_PolicyForwardRnnAttention(benchmark::State& state) {
  policy_forward_bench(state, nn::ArchKind::kRnnAttention);
}
BENCHMARK(BM_PolicyForwardRnnAttention);

void BM_CollectEpisode(benchmark::State& state) {
  const env::NetworkConfig cfg = default_cfg();
  const env::TaskSpec task = default_task(cfg);
  nn::ArchSpec spec;
  const nn::ParamSet params = nn::init_params(spec, rl::policy_dims(cfg), 3);
  Rng rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rl::collect_trajectory(params, spec, task, cfg, cfg.episode_len, rng));
  }
}
BENCHMARK(BM_CollectEpisode);

void BM_MetaIteration(benchmark::State& state) {
  const env::NetworkConfig cfg = default_cfg();
  nn::ArchSpec spec;
  meta::MetaConfig mc;
  mc.meta_batch_size = 2;
  nn::ParamSet theta = nn::init_params(spec, rl::policy_dims(cfg), 3);
  const env::TaskDistParams dist;
  int iter = 0;
  for (auto _ : state) {
    nn::ad::Tape tape;
    nn::VarSet vars = nn::lift(tape, theta);
    std::vector<env::TaskSpec> tasks = {
        env::sample_task(dist, cfg, 100 + iter),
        env::sample_task(dist, cfg, 200 + iter)};
    meta::MetaBatchNodes batch =
        meta::meta_objective(tape, vars, tasks, mc, spec, cfg);
    std::vector<nn::ad::Var> wrt;
    for (const auto& [name, v] : vars.items()) wrt.push_back(v);
    benchmark::DoNotOptimize(nn::ad::grad_values(batch.loss, wrt));
    ++iter;
  }
}
BENCHMARK(BM_MetaIteration);

}  // namespace

BENCHMARK_MAIN();
