#include <benchmark/benchmark.h>

#include "fanlab/dense_matrix.hpp"
#include "fanlab/rng.hpp"
#include "fanlab/svd.hpp"

using namespace fanlab;

static void BM_ThinSvdSquare(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix x = gaussian_matrix(n, n, 1.0, RngStream{1, 0});
  for (auto _ : state) {
    SvdFactors f = thin_svd(x);
    benchmark::DoNotOptimize(f.s.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ThinSvdSquare)->RangeMultiplier(2)->Range(16, 256)->Complexity();

static void BM_ThinSvdBatchShape(benchmark::State& state) {
  // Embedding-batch aspect ratio: B rows, 2B columns.
  const std::size_t b = static_cast<std::size_t>(state.range(0));
  const DenseMatrix x = gaussian_matrix(b, 2 * b, 1.0, RngStream{2, 0});
  for (auto _ : state) {
    SvdFactors f = thin_svd(x);
    benchmark::DoNotOptimize(f.s.data());
  }
}
BENCHMARK(BM_ThinSvdBatchShape)->RangeMultiplier(2)->Range(16, 128);

static void BM_SingularValuesOnly(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix x = gaussian_matrix(n, n, 1.0, RngStream{3, 0});
  for (auto _ : state) {
    std::vector<double> s = singular_values(x);
    benchmark::DoNotOptimize(s.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SingularValuesOnly)
    ->RangeMultiplier(2)
    ->Range(16, 512)
    ->Complexity();

BENCHMARK_MAIN();
