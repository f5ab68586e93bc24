// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include "ptma/stream.hpp"

#include <algorithm>
#include <cmath>

namespace ptma {

template <typename S>
void RowRing<S>::push(std::span<const S> row) {
  if (row.size() != width_) {
    throw ShapeError("ring buffer: row of " + std::to_string(row.size()) + " values, width " +
                     std::to_string(width_));
  }
  std::size_t slot;
  if (size_ < capacity_) {
    slot = (head_ + size_) % capacity_;
    ++size_;
  } else {
    slot = head_;
    head_ = (head_ + 1) % capacity_;
  }
  std::copy(row.begin(), row.end(), data_.begin() + static_cast<long>(slot * width_));
}

template <typename S>
std::span<const S> RowRing<S>::at(std::size_t k) const {
  const std::size_t slot = (head_ + k) % capacity_;
  return {data_.data() + slot * width_, width_};
}

namespace {

// out = x W + b for a single row x.
template <typename S>
std::vector<S> affine_row(std::span<const S> x, const Tensor<S>& W, const Tensor<S>& b) {
  const std::size_t n = W.cols();
  std::vector<S> out(b.data().begin(), b.data().end());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const S xk = x[k];
    const S* w = &W(k, 0);
    for (std::size_t j = 0; j < n; ++j) out[j] += xk * w[j];
  }
  return out;
}

// out += x W
template <typename S>
void add_product(std::vector<S>& out, std::span<const S> x, const Tensor<S>& W) {
  const std::size_t n = W.cols();
  for (std::size_t k = 0; k < x.size(); ++k) {
    const S xk = x[k];
    const S* w = &W(k, 0);
    for (std::size_t j = 0; j < n; ++j) out[j] += xk * w[j];
  }
}

template <typename S>
S logistic(S v) {
  if (v >= S{0}) return S{1} / (S{1} + std::exp(-v));
  const S e = std::exp(v);
  return e / (S{1} + e);
}

template <typename S>
void softmax_inplace(std::vector<S>& v) {
  const S top = *std::max_element(v.begin(), v.end());
  S total{0};
  for (auto& x : v) {
    x = std::exp(x - top);
    total += x;
  }
  for (auto& x : v) x /= total;
}

}  // namespace

template <typename S>
StreamState<S> stream_init(const ModelParams<S>& params, const ModelConfig& config) {
  config.validate();
  params.check_shapes(config);
  StreamState<S> state;
  state.hidden.assign(config.embed_dim, S{0});
  state.encodings = RowRing<S>(config.window, config.embed_dim);
  state.queries = RowRing<S>(config.window, config.embed_dim);
  return state;
}

template <typename S>
StreamOutput<S> stream_step(StreamState<S>& state, const ModelParams<S>& params,
                            const ModelConfig& config, std::span<const S> frame) {
  using P = Param;
  if (frame.size() != config.feature_dim) {
    throw ShapeError("stream_step: frame has " + std::to_string(frame.size()) +
                     " values, expected " + std::to_string(config.feature_dim));
  }
  if (state.hidden.size() != config.embed_dim) {
    throw ShapeError("stream_step: state was not initialized for this config");
  }
  const std::size_t E = config.embed_dim;
  std::span<const S> h_prev(state.hidden);

  // GRU step.
  const auto proj = affine_row<S>(frame, params[P::kInputW], params[P::kInputB]);
  auto update = affine_row<S>(proj, params[P::kGruWz], params[P::kGruBz]);
  auto reset = affine_row<S>(proj, params[P::kGruWr], params[P::kGruBr]);
  auto cand = affine_row<S>(proj, params[P::kGruWn], params[P::kGruBn]);
  add_product(update, h_prev, params[P::kGruUz]);
  add_product(reset, h_prev, params[P::kGruUr]);
  std::vector<S> gated(E);
  for (std::size_t j = 0; j < E; ++j) {
    update[j] = logistic(update[j]);
    gated[j] = logistic(reset[j]) * h_prev[j];
  }
  add_product(cand, std::span<const S>(gated), params[P::kGruUn]);
  std::vector<S> h(E);
  for (std::size_t j = 0; j < E; ++j) {
    const S n = std::tanh(cand[j]);
    h[j] = n + update[j] * (h_prev[j] - n);
  }
  state.hidden = h;
  state.encodings.push(h);
  ++state.frames_seen;

  StreamOutput<S> out;
  std::vector<S> refined = h;
  if (uses_latent(config.mode)) {
    auto trunk = affine_row<S>(frame, params[P::kEncW], params[P::kEncB]);
    for (auto& v : trunk) v = std::max(v, S{0});
    out.mu = affine_row<S>(trunk, params[P::kMuW], params[P::kMuB]);
    const auto query = affine_row<S>(out.mu, params[P::kQueryW], params[P::kQueryB]);
    state.queries.push(query);

    const std::size_t n_keys = state.encodings.size();
    const S scale = static_cast<S>(1.0 / std::sqrt(config.temperature()));
    std::vector<S> weights(n_keys);
    for (std::size_t k = 0; k < n_keys; ++k) {
      const auto key = state.encodings.at(k);
      S dot{0};
      for (std::size_t j = 0; j < E; ++j) dot += query[j] * key[j];
      weights[k] = dot * scale;
    }
    softmax_inplace(weights);
    for (std::size_t k = 0; k < n_keys; ++k) {
      const auto key = state.encodings.at(k);
      for (std::size_t j = 0; j < E; ++j) refined[j] += weights[k] * key[j];
    }
  }
  out.scores = affine_row<S>(refined, params[P::kClsW], params[P::kClsB]);
  softmax_inplace(out.scores);
  return out;
}

template <typename S>
BatchOutput batch_infer(const ModelParams<S>& params, const ModelConfig& config,
                        const Tensor<S>& X, LatentPolicy policy, std::uint64_t seed) {
  config.validate();
  params.check_shapes(config);
  if (X.rows() == 0) throw ShapeError("batch_infer: empty sequence");
  Tape<S> tape;
  const auto p = register_params(tape, params, false);
  Xoshiro256pp rng = Xoshiro256pp::stream(seed, StreamPurpose::kEpsilon);
  const auto g = graph::forward(tape, p, config, X, build_temporal_mask(config.window, X.rows()),
                                policy, rng);
  BatchOutput out;
  out.scores = softmax_rows(g.logits.value()).template cast<double>();
  if (g.has_latent) out.mu = g.mu.value().template cast<double>();
  return out;
}

#define PTMA_INSTANTIATE_STREAM(S)                                                      \
  template class RowRing<S>;                                                            \
  template StreamState<S> stream_init(const ModelParams<S>&, const ModelConfig&);       \
  template StreamOutput<S> stream_step(StreamState<S>&, const ModelParams<S>&,          \
                                       const ModelConfig&, std::span<const S>);         \
  template BatchOutput batch_infer(const ModelParams<S>&, const ModelConfig&,           \
                                   const Tensor<S>&, LatentPolicy, std::uint64_t);

PTMA_INSTANTIATE_STREAM(float)
PTMA_INSTANTIATE_STREAM(double)

#undef PTMA_INSTANTIATE_STREAM

}  // namespace ptma
