// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ptma/model.hpp"

namespace ptma {

/// Fixed-capacity FIFO of row vectors; the oldest row is overwritten first.
template <typename S>
class RowRing {
 public:
  RowRing() = default;
  RowRing(std::size_t capacity, std::size_t width)
      : capacity_(capacity), width_(width), data_(capacity * width) {}

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t width() const { return width_; }

  void push(std::span<const S> row);
  /// Row k in age order: 0 is the oldest retained row.
  std::span<const S> at(std::size_t k) const;

  bool operator==(const RowRing&) const = default;

 private:
  std::size_t capacity_ = 0;
  std::size_t width_ = 0;
  std::size_t head_ = 0;  // slot of the oldest row
  std::size_t size_ = 0;
  std::vector<S> data_;
};

/// Online inference state of one video. Memory is O(T * E) regardless of
/// how many frames have been seen.
template <typename S>
struct StreamState {
  std::vector<S> hidden;  ///< GRU hidden state, E values
  RowRing<S> encodings;   ///< last <= T raw encodings h_j
  RowRing<S> queries;     ///< last <= T expanded latent queries f_q(mu_j)
  std::size_t frames_seen = 0;

  bool operator==(const StreamState&) const = default;
};

template <typename S>
struct StreamOutput {
  std::vector<S> scores;  ///< C+1 class probabilities
  std::vector<S> mu;      ///< latent mean of the frame (empty in baseline mode)
};

template <typename S>
StreamState<S> stream_init(const ModelParams<S>& params, const ModelConfig& config);

/// Advances the recurrence by one frame and scores it. The attention row of
/// the current frame reads only the buffered encodings of the last T frames.
template <typename S>
StreamOutput<S> stream_step(StreamState<S>& state, const ModelParams<S>& params,
                            const ModelConfig& config, std::span<const S> frame);

struct BatchOutput {
  Tensor<double> scores;  ///< K x (C+1)
  Tensor<double> mu;      ///< K x D_z, empty in baseline mode
};

/// Whole-sequence reference: one GRU pass over all K frames and K x K
/// attention under the band mask of width T, with z = mu unless
/// `policy` asks for sampling.
template <typename S>
BatchOutput batch_infer(const ModelParams<S>& params, const ModelConfig& config,
                        const Tensor<S>& X, LatentPolicy policy = LatentPolicy::kMean,
                        std::uint64_t seed = 0);

}  // namespace ptma
