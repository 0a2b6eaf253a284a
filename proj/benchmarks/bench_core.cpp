#include <benchmark/benchmark.h>

#include "enose/nn.hpp"
#include "enose/rng.hpp"
#include "enose/wavelet.hpp"

#include <vector>

namespace {

using namespace enose;

Mat random_features(int t_len, int channels, std::uint64_t seed) {
  Rng rng(seed);
  Mat x(t_len, channels);
  for (int t = 0; t < t_len; ++t) {
    for (int c = 0; c < channels; ++c) x(t, c) = rng.normal(0.0, 1.0);
  }
  return x;
}

void BM_Dwt1(benchmark::State& state) {
  const auto filters = WaveletFilters::db5();
  Rng rng(1);
  std::vector<double> signal(2000);
  for (auto& v : signal) v = rng.normal(0.0, 1.0);
  for (auto _ : state) {
    auto out = dwt1(signal, filters);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_Dwt1);

void BM_AttentionForward(benchmark::State& state) {
  const ModelParams params = init_params({4, 500, 8, 16}, 3, 0.0);
  const Mat x = random_features(1000, 4, 2);
  for (auto _ : state) {
    Mat y = external_attention_forward(x, params.attention);
    benchmark::DoNotOptimize(y);
  }
}
BENCHMARK(BM_AttentionForward);

void BM_GruLayerForward(benchmark::State& state) {
  const ModelParams params = init_params({4, 500, 8, 16}, 4, 0.0);
  const Mat x = random_features(1000, 4, 5);
  const Vec h0 = Vec::Zero(8);
  for (auto _ : state) {
    GruLayerCache cache;
    Mat h = gru_layer_forward(x, params.gru[0], h0, &cache);
    benchmark::DoNotOptimize(h);
  }
}
BENCHMARK(BM_GruLayerForward);

void BM_ModelForwardEval(benchmark::State& state) {
  const ModelParams params = init_params({4, 500, 8, 16}, 6, 0.0);
  const Mat x = random_features(1000, 4, 7);
  for (auto _ : state) {
    Vec logits = model_forward(x, params, RunMode::Eval);
    benchmark::DoNotOptimize(logits);
  }
}
BENCHMARK(BM_ModelForwardEval);

void BM_ModelForwardBackward(benchmark::State& state) {
  const ModelParams params = init_params({4, 500, 8, 16}, 8, 0.0);
  const Mat x = random_features(1000, 4, 9);
  for (auto _ : state) {
    ForwardCache cache;
    const Vec logits = model_forward(x, params, RunMode::Train, nullptr, &cache);
    const auto ce = cross_entropy(logits, GasLabel::Mix);
    Gradients g = model_backward(cache, ce.dlogits);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_ModelForwardBackward);

}  // namespace

BENCHMARK_MAIN();
