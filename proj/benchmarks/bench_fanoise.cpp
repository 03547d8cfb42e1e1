#include <benchmark/benchmark.h>

#include "fanlab/dense_matrix.hpp"
#include "fanlab/fanoise.hpp"
#include "fanlab/rng.hpp"

using namespace fanlab;

static void BM_FanoiseInject(benchmark::State& state) {
  const std::size_t bsz = static_cast<std::size_t>(state.range(0));
  const std::size_t d = static_cast<std::size_t>(state.range(1));
  const DenseMatrix e = gaussian_matrix(bsz, d, 1.0, RngStream{1, 0});
  NoiseConfig cfg;
  cfg.alpha = 0.3;
  std::uint64_t rep = 0;
  for (auto _ : state) {
    cfg.rng = RngStream{7, rep++};
    InjectionResult out = fanoise_inject(e, cfg);
    benchmark::DoNotOptimize(out.e_out.data());
  }
}
BENCHMARK(BM_FanoiseInject)
    ->Args({16, 64})
    ->Args({64, 256})
    ->Args({64, 1536})
    ->Args({256, 1536});

static void BM_NaiveInject(benchmark::State& state) {
  const std::size_t bsz = static_cast<std::size_t>(state.range(0));
  const std::size_t d = static_cast<std::size_t>(state.range(1));
  const DenseMatrix e = gaussian_matrix(bsz, d, 1.0, RngStream{2, 0});
  std::uint64_t rep = 0;
  for (auto _ : state) {
    DenseMatrix out = naive_inject(e, 0.3, RngStream{8, rep++});
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_NaiveInject)->Args({64, 256})->Args({256, 1536});

static void BM_GaussianMatrix(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::uint64_t rep = 0;
  for (auto _ : state) {
    DenseMatrix g = gaussian_matrix(n, n, 1.0, RngStream{9, rep++});
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_GaussianMatrix)->RangeMultiplier(4)->Range(16, 1024);

BENCHMARK_MAIN();
