// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ptma/model.hpp"

namespace ptma {

struct LossWeights {
  double cls = 1.0;
  double rec = 1.0;
  double kld = 0.1;

  /// cls must be > 0; rec and kld >= 0.
  void validate() const;
};

/// Weights actually applied in `mode`: kAe drops kld, kKldOnly drops rec,
/// kQueryOnly and kBaselineGru keep only cls.
LossWeights effective_weights(const LossWeights& weights, Mode mode);

struct LossBreakdown {
  double cls = 0.0;
  double rec = 0.0;
  double kld = 0.0;
  double total = 0.0;
  std::size_t frames_counted = 0;
};

/// total = cls*w.cls + rec*w.rec + kld*w.kld under effective_weights(w, mode).
LossBreakdown total_loss(const LossBreakdown& parts, const LossWeights& weights,
                         Mode mode);

// Graph versions (differentiable). `valid` flags rows that count.

/// Sum over valid frames of -log softmax(logits)[label]; divided by the
/// number of valid frames when `normalize` is set.
template <typename S>
Var<S> cls_loss(const Var<S>& logits, std::span<const std::uint16_t> labels,
                std::span<const std::uint8_t> valid, bool normalize = false);

/// (1 / T_valid) * sum over valid rows of the squared error.
template <typename S>
Var<S> rec_loss(const Tensor<S>& target, const Var<S>& recon,
                std::span<const std::uint8_t> valid);

/// (1 / 2T_valid) * sum (mu^2 + sigma^2 - 1 - log sigma^2): KL(N(mu, sigma^2) || N(0, 1)).
template <typename S>
Var<S> kld_loss(const Var<S>& mu, const Var<S>& sigma,
                std::span<const std::uint8_t> valid);

// Value versions.

template <typename S>
double cls_loss(const Tensor<S>& logits, std::span<const std::uint16_t> labels,
                std::span<const std::uint8_t> valid, bool normalize = false);
template <typename S>
double rec_loss(const Tensor<S>& target, const Tensor<S>& recon,
                std::span<const std::uint8_t> valid);
/// Throws NumericError when any sigma <= 0.
template <typename S>
double kld_loss(const Tensor<S>& mu, const Tensor<S>& sigma,
                std::span<const std::uint8_t> valid);

/// One training window: T rows of input, the reconstruction target (the
/// input itself or a synchronized partner view), labels and validity.
template <typename S>
struct WindowData {
  Tensor<S> input;
  Tensor<S> target;
  std::vector<std::uint16_t> labels;
  std::vector<std::uint8_t> valid;
};

template <typename S>
struct WindowLoss {
  Var<S> total;
  LossBreakdown breakdown;
  WindowGraph<S> graph;
};

/// Forward pass plus the mode-weighted objective, recorded on `tape`.
template <typename S>
WindowLoss<S> build_window_loss(Tape<S>& tape, const ParamVars<S>& params,
                                const ModelConfig& config,
                                const WindowData<S>& window,
                                const LossWeights& weights, bool normalize_cls,
                                Xoshiro256pp& rng);

}  // namespace ptma
