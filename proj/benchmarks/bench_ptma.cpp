// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ptma/metrics.hpp"
#include "ptma/model.hpp"
#include "ptma/objectives.hpp"
#include "ptma/random.hpp"
#include "ptma/stream.hpp"
#include "ptma/tape.hpp"

namespace {

ptma::ModelConfig bench_config(std::size_t window) {
  ptma::ModelConfig c;
  c.feature_dim = 256;
  c.embed_dim = 128;
  c.latent_dim = 32;
  c.num_classes = 10;
  c.window = window;
  c.enc_hidden = 128;
  c.dec_hidden = 128;
  return c;
}

template <typename S>
ptma::Tensor<S> random_features(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  ptma::Xoshiro256pp rng(seed);
  auto X = ptma::Tensor<S>::matrix(rows, cols);
  for (auto& v : X.data()) v = static_cast<S>(rng.normal());
  return X;
}

template <typename S>
void BM_StreamStep(benchmark::State& state) {
  const auto c = bench_config(static_cast<std::size_t>(state.range(0)));
  const auto params = ptma::ModelParams<S>::initialize(c, 1);
  const auto X = random_features<S>(256, c.feature_dim, 2);
  auto s = ptma::stream_init(params, c);
  std::size_t t = 0;
  for (auto _ : state) {
    auto out = ptma::stream_step(s, params, c, std::span<const S>(X.row(t++ % X.rows())));
    benchmark::DoNotOptimize(out.scores.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StreamStep<float>)->Arg(4)->Arg(16)->Arg(64);
BENCHMARK(BM_StreamStep<double>)->Arg(16);

void BM_WindowForwardBackward(benchmark::State& state) {
  const auto c = bench_config(static_cast<std::size_t>(state.range(0)));
  const auto params = ptma::ModelParams<double>::initialize(c, 3);
  ptma::WindowData<double> w;
  w.input = random_features<double>(c.window, c.feature_dim, 4);
  w.target = w.input;
  w.labels.assign(c.window, 1);
  w.valid.assign(c.window, 1);
  ptma::Xoshiro256pp rng(5);
  for (auto _ : state) {
    ptma::Tape<double> tape;
    const auto vars = ptma::register_params(tape, params, true);
    const auto loss = ptma::build_window_loss(tape, vars, c, w, ptma::LossWeights{}, false, rng);
    auto grads = tape.backward(loss.total);
    benchmark::DoNotOptimize(&grads);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.window));
}
BENCHMARK(BM_WindowForwardBackward)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_BatchInfer(benchmark::State& state) {
  const auto c = bench_config(16);
  const auto params = ptma::ModelParams<float>::initialize(c, 6);
  const auto X = random_features<float>(static_cast<std::size_t>(state.range(0)), c.feature_dim, 7);
  for (auto _ : state) {
    auto out = ptma::batch_infer(params, c, X);
    benchmark::DoNotOptimize(out.scores.data().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BatchInfer)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_AveragePrecision(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> scores(n);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = u(gen);
    labels[i] = u(gen) < 0.1;
  }
  labels[0] = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ptma::average_precision(scores, labels, true).ap);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AveragePrecision)->Arg(1 << 10)->Arg(1 << 16)->Arg(1 << 20);

}  // namespace

BENCHMARK_MAIN();
