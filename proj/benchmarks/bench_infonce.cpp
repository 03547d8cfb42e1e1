#include <benchmark/benchmark.h>

#include "fanlab/infonce.hpp"
#include "fanlab/rng.hpp"

using namespace fanlab;

namespace {

EmbeddingBatch batch_of(std::size_t n, std::size_t d) {
  return make_normalized_batch(gaussian_matrix(n, d, 1.0, RngStream{1, 0}),
                               gaussian_matrix(n, d, 1.0, RngStream{1, 1}));
}

}  // namespace

static void BM_LossWithGradients(benchmark::State& state) {
  const EmbeddingBatch b = batch_of(static_cast<std::size_t>(state.range(0)),
                                    static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    LossGradients lg = loss_with_gradients(b, 0.02);
    benchmark::DoNotOptimize(lg.grad_q.data());
  }
}
BENCHMARK(BM_LossWithGradients)
    ->Args({16, 32})
    ->Args({64, 256})
    ->Args({256, 1536});

static void BM_McNoisyGrad(benchmark::State& state) {
  const EmbeddingBatch b = batch_of(16, 32);
  const std::size_t samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    McGradients mc =
        mc_noisy_grad(b, 1.0, 0.05, NoisySide::key, samples, RngStream{3, 0});
    benchmark::DoNotOptimize(mc.grad_q.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(samples));
}
BENCHMARK(BM_McNoisyGrad)->Arg(100)->Arg(1000)->Arg(10000);

static void BM_AlignmentUniformity(benchmark::State& state) {
  const EmbeddingBatch b = batch_of(static_cast<std::size_t>(state.range(0)),
                                    static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    AlignmentUniformity au = alignment_uniformity(b);
    benchmark::DoNotOptimize(au.uniformity);
  }
}
BENCHMARK(BM_AlignmentUniformity)->Args({64, 256})->Args({256, 1536});

BENCHMARK_MAIN();
