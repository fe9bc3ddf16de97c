#include <benchmark/benchmark.h>

#include "froglab/frog_engine.hpp"
#include "froglab/recurrence.hpp"
#include "froglab/rng.hpp"
#include "froglab/tree.hpp"
#include "froglab/walks.hpp"

namespace {

using namespace froglab;

void BM_SelfSimilarRun(benchmark::State& state) {
  SimConfig cfg;
  cfg.tree = TreeKind::rooted_infinite(2);
  cfg.variant = FrogVariant::SelfSimilar;
  cfg.init = InitLaw::poisson(21.0);
  cfg.horizon = static_cast<int>(state.range(0));
  cfg.prune_depth = cfg.horizon / 2;
  cfg.record_first_visits = false;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cfg.seed = seed++;
    benchmark::DoNotOptimize(run_self_similar(cfg));
  }
}
BENCHMARK(BM_SelfSimilarRun)->Arg(8)->Arg(16);

void BM_ReflectedRun(benchmark::State& state) {
  SimConfig cfg;
  cfg.tree = TreeKind::rooted_infinite(2);
  cfg.variant = FrogVariant::SelfSimilar;
  cfg.root_reflect = true;
  cfg.init = InitLaw::poisson(20.0);
  cfg.horizon = static_cast<int>(state.range(0));
  cfg.prune_depth = std::min(cfg.horizon / 2, 16);
  cfg.record_first_visits = false;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cfg.seed = seed++;
    benchmark::DoNotOptimize(run_self_similar(cfg));
  }
}
BENCHMARK(BM_ReflectedRun)->Arg(20)->Arg(40);

void BM_ComposeSrw(benchmark::State& state) {
  const TreeKind tree = TreeKind::homogeneous(2);
  const StepKernel kernel{WalkKind::UniformNonbacktracking};
  Rng rng = derive_rng(7, 0);
  const auto steps = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const Path spine = sample_walk(kernel, tree, VertexRef::root(), steps, rng);
    benchmark::DoNotOptimize(compose_srw(spine, tree, rng));
  }
}
BENCHMARK(BM_ComposeSrw)->Arg(4)->Arg(16);

void BM_ComputeTables(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_tables(2, 21.0, n));
  }
}
BENCHMARK(BM_ComputeTables)->Arg(50)->Arg(500);

void BM_StarOperator(benchmark::State& state) {
  Rng rng = derive_rng(9, 0);
  const PatternSampler empty = [](Rng&) { return PointPattern{}; };
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_star_A(empty, 2, 21.0, rng));
  }
}
BENCHMARK(BM_StarOperator);

}  // namespace

BENCHMARK_MAIN();
