// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include <gtest/gtest.h>

#include <cmath>

#include "ptma/stream.hpp"
#include "ptma/trainer.hpp"
#include "test_support.hpp"

namespace ptma {
namespace {

using test::random_matrix;

ModelConfig stream_config(std::size_t T, Mode mode = Mode::kFull) {
  ModelConfig c;
  c.feature_dim = 7;
  c.embed_dim = 6;
  c.latent_dim = 3;
  c.num_classes = 3;
  c.window = T;
  c.enc_hidden = 5;
  c.dec_hidden = 5;
  c.mode = mode;
  return c;
}

template <typename S>
Tensor<double> stream_all(const ModelParams<S>& params, const ModelConfig& c, const Tensor<S>& X) {
  auto state = stream_init(params, c);
  Tensor<double> out = Tensor<double>::matrix(X.rows(), c.num_outputs());
  for (std::size_t t = 0; t < X.rows(); ++t) {
    const auto step = stream_step(state, params, c, X.row(t));
    for (std::size_t k = 0; k < step.scores.size(); ++k) out(t, k) = step.scores[k];
  }
  return out;
}

TEST(RowRing, KeepsNewestRowsInAgeOrder) {
  RowRing<double> ring(3, 2);
  for (int i = 0; i < 5; ++i) {
    const double row[2] = {double(i), double(10 * i)};
    ring.push(row);
  }
  EXPECT_EQ(ring.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(ring.at(k)[0], double(k + 2));
    EXPECT_EQ(ring.at(k)[1], double(10 * (k + 2)));
  }
}

TEST(StreamInit, FreshStateIsEmptyAndRepeatable) {
  const auto c = stream_config(4);
  const auto params = ModelParams<double>::initialize(c, 1);
  const auto a = stream_init(params, c);
  EXPECT_EQ(a.frames_seen, 0u);
  EXPECT_EQ(a.encodings.size(), 0u);
  EXPECT_EQ(a.queries.size(), 0u);
  for (double h : a.hidden) EXPECT_EQ(h, 0.0);
  EXPECT_EQ(a, stream_init(params, c));
}

TEST(StreamStep, ScoresAreADistribution) {
  const auto c = stream_config(4);
  const auto params = ModelParams<double>::initialize(c, 2);
  auto state = stream_init(params, c);
  Xoshiro256pp rng(2);
  for (int t = 0; t < 20; ++t) {
    const auto x = random_matrix<double>(1, c.feature_dim, rng, -3, 3);
    const auto out = stream_step(state, params, c, x.data());
    double sum = 0.0;
    for (double p : out.scores) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(out.mu.size(), c.latent_dim);
  }
  EXPECT_EQ(state.frames_seen, 20u);
}

TEST(StreamStep, FirstStepMatchesOneFrameBatch) {
  const auto c = stream_config(4);
  const auto params = ModelParams<double>::initialize(c, 3);
  Xoshiro256pp rng(3);
  const auto x = random_matrix<double>(1, c.feature_dim, rng);
  auto state = stream_init(params, c);
  const auto out = stream_step(state, params, c, x.data());
  const auto batch = batch_infer(params, c, x);
  for (std::size_t k = 0; k < c.num_outputs(); ++k) EXPECT_NEAR(out.scores[k], batch.scores[k], 1e-15);
  for (std::size_t i = 0; i < c.latent_dim; ++i) EXPECT_NEAR(out.mu[i], batch.mu[i], 1e-15);
}

TEST(StreamStep, RejectsWrongFrameWidth) {
  const auto c = stream_config(4);
  const auto params = ModelParams<double>::initialize(c, 3);
  auto state = stream_init(params, c);
  const std::vector<double> short_frame(c.feature_dim - 1, 0.0);
  EXPECT_THROW(stream_step(state, params, c, std::span<const double>(short_frame)), ShapeError);
}

struct EquivalenceCase {
  std::size_t window;
  std::size_t frames;
  Mode mode;
};

class StreamBatchEquivalence : public ::testing::TestWithParam<EquivalenceCase> {};

TEST_P(StreamBatchEquivalence, DoublePrecisionAgreesTo1e12) {
  const auto [T, K, mode] = GetParam();
  const auto c = stream_config(T, mode);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto params = ModelParams<double>::initialize(c, 40 + seed);
    Xoshiro256pp rng(seed);
    const auto X = random_matrix<double>(K, c.feature_dim, rng, -2, 2);
    const auto streamed = stream_all(params, c, X);
    const auto batch = batch_infer(params, c, X).scores;
    double gap = 0.0;
    for (std::size_t i = 0; i < streamed.size(); ++i) gap = std::max(gap, std::abs(streamed[i] - batch[i]));
    EXPECT_LE(gap, 1e-12) << "T=" << T << " K=" << K;
  }
}

TEST_P(StreamBatchEquivalence, SinglePrecisionAgreesTo1e6Relative) {
  const auto [T, K, mode] = GetParam();
  const auto c = stream_config(T, mode);
  const auto params = ModelParams<float>::initialize(c, 50);
  Xoshiro256pp rng(9);
  const auto X = random_matrix<float>(K, c.feature_dim, rng, -2, 2);
  const auto streamed = stream_all(params, c, X);
  const auto batch = batch_infer(params, c, X).scores;
  for (std::size_t i = 0; i < streamed.size(); ++i) {
    EXPECT_LE(std::abs(streamed[i] - batch[i]), 1e-6 * std::max(std::abs(batch[i]), 1e-30) + 1e-7)
        << "element " << i;
  }
}

std::vector<EquivalenceCase> equivalence_cases() {
  std::vector<EquivalenceCase> out;
  for (std::size_t T : {1u, 4u, 16u}) {
    for (std::size_t K : {1u, 5u, 64u, 256u}) out.push_back({T, K, Mode::kFull});
  }
  for (Mode m : {Mode::kBaselineGru, Mode::kQueryOnly, Mode::kAe, Mode::kKldOnly}) {
    out.push_back({4, 37, m});
  }
  return out;
}

INSTANTIATE_TEST_SUITE_P(Grid, StreamBatchEquivalence, ::testing::ValuesIn(equivalence_cases()),
                         [](const auto& info) {
                           std::string m(mode_name(info.param.mode));
                           std::replace(m.begin(), m.end(), '-', '_');
                           return "T" + std::to_string(info.param.window) + "_K" +
                                  std::to_string(info.param.frames) + "_" + m;
                         });

TEST(StreamState, BufferHoldsOnlyTheBandOfEncodings) {
  const std::size_t T = 4;
  const auto c = stream_config(T);
  const auto params = ModelParams<double>::initialize(c, 5);
  Xoshiro256pp rng(5);
  const auto X = random_matrix<double>(11, c.feature_dim, rng);
  const auto H = gru_forward(params, X);
  auto state = stream_init(params, c);
  for (std::size_t t = 0; t < X.rows(); ++t) {
    stream_step(state, params, c, X.row(t));
    ASSERT_EQ(state.encodings.size(), std::min(t + 1, T));
    const std::size_t oldest = t + 1 - state.encodings.size();
    for (std::size_t k = 0; k < state.encodings.size(); ++k) {
      for (std::size_t e = 0; e < c.embed_dim; ++e) {
        EXPECT_NEAR(state.encodings.at(k)[e], H(oldest + k, e), 1e-14);
      }
    }
  }
}

TEST(StreamState, AttentionIgnoresEvictedKeys) {
  // Same hidden trajectory, different keys outside the band: overwrite the
  // evicted history by refilling the ring and compare the next step.
  const std::size_t T = 3;
  const auto c = stream_config(T);
  const auto params = ModelParams<double>::initialize(c, 6);
  Xoshiro256pp rng(6);
  const auto X = random_matrix<double>(8, c.feature_dim, rng);
  auto a = stream_init(params, c);
  for (std::size_t t = 0; t < 7; ++t) stream_step(a, params, c, X.row(t));
  auto b = a;
  // Rebuild b's ring from its own last T rows only; older keys never existed.
  RowRing<double> fresh(T, c.embed_dim);
  for (std::size_t k = 0; k < b.encodings.size(); ++k) fresh.push(b.encodings.at(k));
  b.encodings = fresh;
  const auto out_a = stream_step(a, params, c, X.row(7));
  const auto out_b = stream_step(b, params, c, X.row(7));
  EXPECT_EQ(out_a.scores, out_b.scores);
}

TEST(StreamState, MemoryDoesNotGrowWithVideoLength) {
  const auto c = stream_config(4);
  const auto params = ModelParams<double>::initialize(c, 7);
  Xoshiro256pp rng(7);
  const auto X = random_matrix<double>(500, c.feature_dim, rng);
  auto state = stream_init(params, c);
  std::size_t enc_cap = 0, q_cap = 0;
  for (std::size_t t = 0; t < X.rows(); ++t) {
    stream_step(state, params, c, X.row(t));
    if (t == c.window) {
      enc_cap = state.encodings.capacity() * state.encodings.width();
      q_cap = state.queries.capacity() * state.queries.width();
    }
  }
  EXPECT_EQ(state.encodings.capacity() * state.encodings.width(), enc_cap);
  EXPECT_EQ(state.queries.capacity() * state.queries.width(), q_cap);
  EXPECT_EQ(enc_cap, c.window * c.embed_dim);
  EXPECT_EQ(state.hidden.size(), c.embed_dim);
}

TEST(BatchInfer, ShortVideoMatchesForwardWindowWithoutPadding) {
  const auto c = stream_config(8);
  const auto params = ModelParams<double>::initialize(c, 8);
  Xoshiro256pp rng(8);
  const auto X = random_matrix<double>(8, c.feature_dim, rng);
  Xoshiro256pp unused(0);
  const auto trace = forward_window(params, c, X, unused, LatentPolicy::kMean);
  const auto probs = softmax_rows(trace.logits);
  const auto batch = batch_infer(params, c, X);
  for (std::size_t i = 0; i < probs.size(); ++i) EXPECT_NEAR(batch.scores[i], probs[i], 1e-15);
}

TEST(BatchInfer, BackgroundOnlyToyPredictsBackground) {
  DatasetCatalog catalog;
  catalog.num_classes = 2;
  catalog.feature_dim = 4;
  Xoshiro256pp rng(10);
  for (std::uint32_t v = 1; v <= 2; ++v) {
    FeatureSequence seq;
    seq.num_frames = 24;
    seq.feature_dim = 4;
    seq.num_classes = 2;
    seq.video_id = v;
    seq.view_id = 1;
    seq.subject_id = v;
    for (std::size_t i = 0; i < 24 * 4; ++i) seq.features.push_back(static_cast<float>(rng.normal()));
    seq.labels.assign(24, 0);
    catalog.sequences.push_back(seq);
  }
  ModelConfig c = stream_config(4);
  c.feature_dim = 4;
  c.num_classes = 2;
  TrainConfig tc;
  tc.epochs = 4;
  tc.batch_size = 2;
  tc.lr0 = 1e-2;
  const std::vector<TrainPair> train = {{0, {}}, {1, {}}};
  const auto result = train_run(catalog, train, {}, c, tc);
  EXPECT_EQ(result.log.epochs.front().val_measure, "accuracy");
  for (const auto& seq : catalog.sequences) {
    const auto scores = stream_all(result.params, c, seq.matrix<float>());
    for (std::size_t t = 0; t < seq.num_frames; ++t) {
      for (std::size_t k = 1; k <= 2; ++k) EXPECT_GT(scores(t, 0), scores(t, k)) << "frame " << t;
    }
  }
}

}  // namespace
}  // namespace ptma
