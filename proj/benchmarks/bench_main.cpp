#include <benchmark/benchmark.h>

#include "emolens/features.hpp"
#include "emolens/fixtures.hpp"
#include "emolens/nn.hpp"
#include "emolens/pipeline.hpp"
#include "emolens/random.hpp"

using namespace emolens;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

void BM_FftMagnitude(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = noise(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(features::dft_magnitude(x, n));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FftMagnitude)->RangeMultiplier(4)->Range(64, 1024)->Complexity(benchmark::oNLogN);

void BM_NaiveDftMagnitude(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = noise(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(features::dft_magnitude_naive(x, n));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NaiveDftMagnitude)->RangeMultiplier(4)->Range(64, 1024)->Complexity(benchmark::oNSquared);

void BM_Mfcc(benchmark::State& state) {
  Rng rng(2);
  const auto clip = fixtures::synth_tone(Emotion::kHappy, static_cast<double>(state.range(0)), 16000, rng);
  const features::FeatureConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(features::mfcc(clip, cfg));
  state.SetLabel(std::to_string(state.range(0)) + " s of audio");
}
BENCHMARK(BM_Mfcc)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_DnnPredict(benchmark::State& state) {
  const auto model = nn::initialize(nn::default_dnn_spec(28), 3);
  const auto x = nn::Tensor::row_vector(noise(28, 4));
  for (auto _ : state) benchmark::DoNotOptimize(nn::predict(model, x));
}
BENCHMARK(BM_DnnPredict)->Unit(benchmark::kMicrosecond);

void BM_CnnPredict(benchmark::State& state) {
  const auto model = nn::initialize(nn::default_cnn_spec(14), 3);
  const auto x = nn::Tensor::matrix(298, 14, noise(298 * 14, 5));
  for (auto _ : state) benchmark::DoNotOptimize(nn::predict(model, x));
  state.SetLabel("3 s window");
}
BENCHMARK(BM_CnnPredict)->Unit(benchmark::kMicrosecond);

// One Adam step on a 32-example batch.
void BM_DnnTrainStep(benchmark::State& state) {
  auto model = nn::initialize(nn::default_dnn_spec(28), 6);
  std::vector<nn::Example> batch;
  for (std::size_t i = 0; i < 32; ++i) {
    batch.push_back({nn::Tensor::row_vector(noise(28, 10 + i)), kAllEmotions[i % kNumEmotions]});
  }
  auto adam = nn::make_adam_state(model.params);
  const nn::AdamConfig cfg;
  for (auto _ : state) {
    const auto g = nn::backward(model, batch);
    nn::adam_step(model.params, g.grads, adam, 1e-3, cfg);
    benchmark::DoNotOptimize(g.loss);
  }
}
BENCHMARK(BM_DnnTrainStep)->Unit(benchmark::kMicrosecond);

void BM_AnalyzeSession(benchmark::State& state) {
  const auto clip = fixtures::synth_session(10.0, 16000, 8);
  const auto words = fixtures::session_transcript(10.0);
  const auto model = nn::initialize(nn::default_dnn_spec(28), 7);
  for (auto _ : state) {
    pipeline::FixedTranscriber asr(words);
    benchmark::DoNotOptimize(pipeline::analyze(clip, model, asr));
  }
  state.SetLabel("10 s session");
}
BENCHMARK(BM_AnalyzeSession)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
