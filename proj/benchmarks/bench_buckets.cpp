#include <benchmark/benchmark.h>

#include "tkge/buckets.hpp"
#include "tkge/rng.hpp"

using namespace tkge;

namespace {

std::vector<std::pair<Year, Year>> corpus_spans(std::size_t n) {
  Rng rng(mix64(3));
  std::vector<std::pair<Year, Year>> spans;
  spans.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Year s = static_cast<Year>(-431 + rng.below(2400));
    Year e = (rng.unit() < 0.15) ? 3000 : s + static_cast<Year>(rng.below(25));
    spans.push_back({s, e});
  }
  return spans;
}

void BM_ExpandFineSlices(benchmark::State& state) {
  auto spans = corpus_spans(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    SliceHistogram hist = expand_fine_slices(spans, {1, 300});
    benchmark::DoNotOptimize(hist.num_slices());
  }
}
BENCHMARK(BM_ExpandFineSlices)->Arg(2000)->Arg(16000);

void BM_BuildBoundaries(benchmark::State& state) {
  auto spans = corpus_spans(16000);
  SliceHistogram hist = expand_fine_slices(spans, {1, 300});
  for (auto _ : state) {
    BucketIndex index = build_boundaries(hist, {1, 300});
    benchmark::DoNotOptimize(index.num_buckets());
  }
}
BENCHMARK(BM_BuildBoundaries);

void BM_BucketLookup(benchmark::State& state) {
  auto spans = corpus_spans(16000);
  BucketIndex index = build_boundaries(expand_fine_slices(spans, {1, 300}), {1, 300});
  Rng rng(mix64(9));
  for (auto _ : state)
    benchmark::DoNotOptimize(index.bucket_of(static_cast<Year>(rng.below(3500)) - 431));
}
BENCHMARK(BM_BucketLookup);

}  // namespace

BENCHMARK_MAIN();
