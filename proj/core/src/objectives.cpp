// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include "ptma/objectives.hpp"

#include <cmath>
#include <string>

namespace ptma {

namespace {

std::size_t count_valid(std::span<const std::uint8_t> valid, std::size_t rows,
                        const char* who) {
  if (valid.size() != rows) {
    throw ShapeError(std::string(who) + ": " + std::to_string(valid.size()) +
                     " validity flags for " + std::to_string(rows) + " rows");
  }
  std::size_t n = 0;
  for (auto v : valid) n += v ? 1 : 0;
  if (n == 0) throw DataError(std::string(who) + ": no valid frames");
  return n;
}

// rows x cols of 1 on valid rows, 0 elsewhere.
template <typename S>
Tensor<S> row_mask(std::span<const std::uint8_t> valid, std::size_t cols) {
  Tensor<S> m = Tensor<S>::matrix(valid.size(), cols);
  for (std::size_t r = 0; r < valid.size(); ++r) {
    if (!valid[r]) continue;
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = S{1};
  }
  return m;
}

}  // namespace

void LossWeights::validate() const {
  if (!(cls > 0.0)) throw ConfigError("loss weights: lambda1 must be > 0");
  if (!(rec >= 0.0) || !(kld >= 0.0)) {
    throw ConfigError("loss weights: lambda2 and lambda3 must be >= 0");
  }
}

LossWeights effective_weights(const LossWeights& w, Mode mode) {
  LossWeights out = w;
  switch (mode) {
    case Mode::kBaselineGru:
    case Mode::kQueryOnly:
      out.rec = 0.0;
      out.kld = 0.0;
      break;
    case Mode::kAe:
      out.kld = 0.0;
      break;
    case Mode::kKldOnly:
      out.rec = 0.0;
      break;
    case Mode::kFull:
      break;
  }
  return out;
}

LossBreakdown total_loss(const LossBreakdown& parts, const LossWeights& weights,
                         Mode mode) {
  const LossWeights w = effective_weights(weights, mode);
  LossBreakdown out = parts;
  out.total = w.cls * parts.cls;
  if (w.rec != 0.0) out.total += w.rec * parts.rec;
  if (w.kld != 0.0) out.total += w.kld * parts.kld;
  return out;
}

template <typename S>
Var<S> cls_loss(const Var<S>& logits, std::span<const std::uint16_t> labels,
                std::span<const std::uint8_t> valid, bool normalize) {
  const Tensor<S>& x = logits.value();
  const std::size_t n_valid = count_valid(valid, x.rows(), "cls_loss");
  if (labels.size() != x.rows()) {
    throw ShapeError("cls_loss: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(x.rows()) + " rows");
  }
  Tensor<S> onehot(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (!valid[r]) continue;
    if (labels[r] >= x.cols()) {
      throw DataError("cls_loss: label " + std::to_string(labels[r]) +
                      " outside 0.." + std::to_string(x.cols() - 1));
    }
    onehot(r, labels[r]) = S{1};
  }
  const Var<S> picked =
      sum(mul(log_softmax(logits), logits.tape()->constant(std::move(onehot))));
  const double scale = normalize ? -1.0 / static_cast<double>(n_valid) : -1.0;
  return affine(picked, scale);
}

template <typename S>
Var<S> rec_loss(const Tensor<S>& target, const Var<S>& recon,
                std::span<const std::uint8_t> valid) {
  if (target.shape() != recon.value().shape()) {
    throw ShapeError("rec_loss: target " + shape_str(target.shape()) + " vs reconstruction " +
                     shape_str(recon.value().shape()));
  }
  const std::size_t n_valid = count_valid(valid, target.rows(), "rec_loss");
  Tape<S>& tape = *recon.tape();
  const Var<S> err = square(sub(recon, tape.constant(target)));
  const Var<S> masked = mul(err, tape.constant(row_mask<S>(valid, target.cols())));
  return affine(sum(masked), 1.0 / static_cast<double>(n_valid));
}

template <typename S>
Var<S> kld_loss(const Var<S>& mu, const Var<S>& sigma,
                std::span<const std::uint8_t> valid) {
  if (mu.value().shape() != sigma.value().shape()) {
    throw ShapeError("kld_loss: mu " + shape_str(mu.value().shape()) + " vs sigma " +
                     shape_str(sigma.value().shape()));
  }
  for (S s : sigma.value().data()) {
    if (!(s > S{0})) throw NumericError("kld_loss: sigma must be > 0");
  }
  const std::size_t n_valid = count_valid(valid, mu.value().rows(), "kld_loss");
  Tape<S>& tape = *mu.tape();
  const Var<S> terms =
      affine(sub(add(square(mu), square(sigma)), affine(log(sigma), 2.0)), 1.0, -1.0);
  const Var<S> masked = mul(terms, tape.constant(row_mask<S>(valid, mu.value().cols())));
  return affine(sum(masked), 0.5 / static_cast<double>(n_valid));
}

template <typename S>
double cls_loss(const Tensor<S>& logits, std::span<const std::uint16_t> labels,
                std::span<const std::uint8_t> valid, bool normalize) {
  Tape<S> tape;
  return static_cast<double>(
      cls_loss(tape.constant(logits), labels, valid, normalize).value().item());
}

template <typename S>
double rec_loss(const Tensor<S>& target, const Tensor<S>& recon,
                std::span<const std::uint8_t> valid) {
  Tape<S> tape;
  return static_cast<double>(rec_loss(target, tape.constant(recon), valid).value().item());
}

template <typename S>
double kld_loss(const Tensor<S>& mu, const Tensor<S>& sigma,
                std::span<const std::uint8_t> valid) {
  Tape<S> tape;
  return static_cast<double>(
      kld_loss(tape.constant(mu), tape.constant(sigma), valid).value().item());
}

template <typename S>
WindowLoss<S> build_window_loss(Tape<S>& tape, const ParamVars<S>& params,
                                const ModelConfig& config,
                                const WindowData<S>& window,
                                const LossWeights& weights, bool normalize_cls,
                                Xoshiro256pp& rng) {
  weights.validate();
  const LossWeights w = effective_weights(weights, config.mode);
  WindowLoss<S> out;
  out.graph = graph::forward(tape, params, config, window.input,
                             build_temporal_mask(config.window, window.input.rows()),
                             LatentPolicy::kSample, rng);
  const auto& g = out.graph;

  const Var<S> cls = cls_loss(g.logits, window.labels, window.valid, normalize_cls);
  out.breakdown.cls = static_cast<double>(cls.value().item());
  Var<S> total = w.cls == 1.0 ? cls : affine(cls, w.cls);

  if (g.has_recon) {
    const Var<S> rec = rec_loss(window.target, g.recon, window.valid);
    out.breakdown.rec = static_cast<double>(rec.value().item());
    if (w.rec != 0.0) total = add(total, affine(rec, w.rec));
  }
  if (g.has_latent) {
    const Var<S> kld = kld_loss(g.mu, g.sigma, window.valid);
    out.breakdown.kld = static_cast<double>(kld.value().item());
    if (w.kld != 0.0) total = add(total, affine(kld, w.kld));
  }
  out.total = total;
  out.breakdown.total = static_cast<double>(total.value().item());
  for (auto v : window.valid) out.breakdown.frames_counted += v ? 1 : 0;
  return out;
}

#define PTMA_INSTANTIATE_OBJECTIVES(S)                                           \
  template Var<S> cls_loss(const Var<S>&, std::span<const std::uint16_t>,        \
                           std::span<const std::uint8_t>, bool);                 \
  template Var<S> rec_loss(const Tensor<S>&, const Var<S>&,                      \
                           std::span<const std::uint8_t>);                       \
  template Var<S> kld_loss(const Var<S>&, const Var<S>&,                         \
                           std::span<const std::uint8_t>);                       \
  template double cls_loss(const Tensor<S>&, std::span<const std::uint16_t>,     \
                           std::span<const std::uint8_t>, bool);                 \
  template double rec_loss(const Tensor<S>&, const Tensor<S>&,                   \
                           std::span<const std::uint8_t>);                       \
  template double kld_loss(const Tensor<S>&, const Tensor<S>&,                   \
                           std::span<const std::uint8_t>);                       \
  template WindowLoss<S> build_window_loss(Tape<S>&, const ParamVars<S>&,        \
                                           const ModelConfig&,                   \
                                           const WindowData<S>&,                 \
                                           const LossWeights&, bool, Xoshiro256pp&);

PTMA_INSTANTIATE_OBJECTIVES(float)
PTMA_INSTANTIATE_OBJECTIVES(double)

#undef PTMA_INSTANTIATE_OBJECTIVES

}  // namespace ptma
