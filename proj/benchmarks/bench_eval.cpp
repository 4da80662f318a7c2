#include <benchmark/benchmark.h>

#include "tkge/eval.hpp"
#include "tkge/rng.hpp"

using namespace tkge;

namespace {

void BM_RankCandidates(benchmark::State& state) {
  int entities = static_cast<int>(state.range(0));
  EmbeddingStore store(ModelKind::bt_hyte, entities, 10, 64, 128);
  store.init_uniform(1);
  std::vector<Year> cuts;
  for (int i = 1; i < 64; ++i) cuts.push_back(static_cast<Year>(1900 + i));
  BucketIndex index(std::move(cuts), 1900, 2017);
  Quadruple q{entities / 2, 3, entities / 3, 1950, 1960};
  for (auto _ : state)
    benchmark::DoNotOptimize(
        rank_candidates(q, Task::tail, store, ModelKind::bt_hyte, Norm::l1, index).rank);
}
BENCHMARK(BM_RankCandidates)->Arg(1000)->Arg(10623)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
