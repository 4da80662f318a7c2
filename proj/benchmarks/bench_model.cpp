#include <benchmark/benchmark.h>

#include "tkge/model.hpp"
#include "tkge/rng.hpp"

using namespace tkge;

namespace {

EmbeddingStore make_store(int dim) {
  EmbeddingStore store(ModelKind::bt_hyte, 10000, 10, 64, dim);
  store.init_uniform(1);
  return store;
}

void BM_Project(benchmark::State& state) {
  int dim = static_cast<int>(state.range(0));
  EmbeddingStore store = make_store(dim);
  std::vector<double> v(static_cast<std::size_t>(dim), 0.3), out(v.size());
  for (auto _ : state) {
    project_onto_plane(v, store.normal(7), out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Project)->Arg(32)->Arg(128);

void BM_Score(benchmark::State& state) {
  int dim = static_cast<int>(state.range(0));
  Norm norm = state.range(1) == 0 ? Norm::l1 : Norm::l2;
  EmbeddingStore store = make_store(dim);
  Quadruple q{11, 3, 222, 1950, 1960};
  for (auto _ : state)
    benchmark::DoNotOptimize(score(q, 5, ModelKind::bt_hyte, norm, store));
}
BENCHMARK(BM_Score)->Args({128, 0})->Args({128, 1});

void BM_GradientStep(benchmark::State& state) {
  int dim = static_cast<int>(state.range(0));
  EmbeddingStore store = make_store(dim);
  Quadruple pos{11, 3, 222, 1950, 1960};
  Quadruple neg{11, 3, 223, 1950, 1960};
  for (auto _ : state) {
    double ps = score(pos, 5, ModelKind::bt_hyte, Norm::l1, store);
    double ns = score(neg, 5, ModelKind::bt_hyte, Norm::l1, store);
    auto grads = gradients({pos, 5, ps}, {neg, 5, ns}, 10.0, ModelKind::bt_hyte, Norm::l1, store);
    apply_gradients(store, grads, 1e-4);
    benchmark::DoNotOptimize(store.entity(11).data());
  }
}
BENCHMARK(BM_GradientStep)->Arg(128);

void BM_EnforceConstraints(benchmark::State& state) {
  EmbeddingStore store = make_store(128);
  for (auto _ : state) {
    enforce_constraints(store);
    benchmark::DoNotOptimize(store.normal(0).data());
  }
}
BENCHMARK(BM_EnforceConstraints);

}  // namespace

BENCHMARK_MAIN();
