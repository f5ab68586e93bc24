// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ptma/random.hpp"
#include "ptma/tape.hpp"

namespace ptma {

/// Which parts of the network are active. kBaselineGru is the plain GRU
/// classifier; kQueryOnly keeps the encoder as a learnable query but trains
/// without reconstruction/KL terms; kAe drops the KL term; kKldOnly drops the
/// reconstruction term; kFull uses everything.
enum class Mode : std::uint8_t {
  kBaselineGru = 0,
  kQueryOnly = 1,
  kAe = 2,
  kKldOnly = 3,
  kFull = 4,
};

std::string_view mode_name(Mode mode);
/// Accepts "baseline-gru", "query-only", "ae", "kld-only", "full".
Mode parse_mode(std::string_view name);

inline bool uses_latent(Mode mode) { return mode != Mode::kBaselineGru; }
inline bool uses_decoder(Mode mode) {
  return mode == Mode::kAe || mode == Mode::kKldOnly || mode == Mode::kFull;
}

struct ModelConfig {
  std::size_t feature_dim = 0;   ///< D
  std::size_t embed_dim = 512;   ///< E: GRU hidden size and attention width
  std::size_t latent_dim = 256;  ///< D_z
  std::size_t num_classes = 0;   ///< C; labels are 0..C with 0 = background
  std::size_t window = 64;       ///< T
  /// Attention temperature; scores are divided by sqrt(alpha). A value of 0
  /// means "use embed_dim".
  double alpha = 0.0;
  std::size_t enc_hidden = 256;
  std::size_t dec_hidden = 256;
  Mode mode = Mode::kFull;

  double temperature() const {
    return alpha > 0.0 ? alpha : static_cast<double>(embed_dim);
  }
  std::size_t num_outputs() const { return num_classes + 1; }

  /// Throws ConfigError on any zero dimension or negative alpha.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

enum class Param : std::size_t {
  kInputW,
  kInputB,
  kGruWz,
  kGruWr,
  kGruWn,
  kGruUz,
  kGruUr,
  kGruUn,
  kGruBz,
  kGruBr,
  kGruBn,
  kEncW,
  kEncB,
  kMuW,
  kMuB,
  kLogVarW,
  kLogVarB,
  kDecW1,
  kDecB1,
  kDecW2,
  kDecB2,
  kQueryW,
  kQueryB,
  kClsW,
  kClsB,
  kCount,
};

inline constexpr std::size_t kParamCount = static_cast<std::size_t>(Param::kCount);

std::string_view param_name(Param p);
std::string_view param_name(std::size_t index);
/// Shape of every parameter, indexed like Param.
std::array<Shape, kParamCount> param_shapes(const ModelConfig& config);

/// All learnable tensors of both branches, indexed by Param.
template <typename S>
struct ModelParams {
  std::array<Tensor<S>, kParamCount> tensors;

  Tensor<S>& operator[](Param p) { return tensors[static_cast<std::size_t>(p)]; }
  const Tensor<S>& operator[](Param p) const {
    return tensors[static_cast<std::size_t>(p)];
  }

  static ModelParams zeros(const ModelConfig& config);
  /// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) from the init stream of
  /// `seed`; biases zero.
  static ModelParams initialize(const ModelConfig& config, std::uint64_t seed);

  template <typename U>
  ModelParams<U> cast() const {
    ModelParams<U> out;
    for (std::size_t i = 0; i < kParamCount; ++i) out.tensors[i] = tensors[i].template cast<U>();
    return out;
  }

  bool all_finite() const;
  /// Throws ShapeError unless every tensor matches `config`.
  void check_shapes(const ModelConfig& config) const;
};

/// Band-limited causal mask over a sequence of `length` steps: query i may
/// read key j iff i - window < j <= i.
class TemporalMask {
 public:
  TemporalMask(std::size_t window, std::size_t length);

  std::size_t window() const { return window_; }
  std::size_t length() const { return length_; }

  bool unmasked(std::size_t i, std::size_t j) const {
    return j <= i && i < j + window_;
  }
  double value(std::size_t i, std::size_t j) const {
    return unmasked(i, j) ? 0.0 : kMaskSentinel;
  }
  /// length x length additive matrix of {0, kMaskSentinel}.
  template <typename S>
  Tensor<S> additive() const;

 private:
  std::size_t window_;
  std::size_t length_;
};

TemporalMask build_temporal_mask(std::size_t window, std::size_t length);

/// Intermediate values of one forward pass. Latent fields are empty in
/// kBaselineGru; `recon` is empty unless the decoder ran.
template <typename S>
struct ForwardTrace {
  Tensor<S> H;
  Tensor<S> mu;
  Tensor<S> sigma;
  Tensor<S> eps;
  Tensor<S> z;
  Tensor<S> recon;
  Tensor<S> A;
  Tensor<S> refined;
  Tensor<S> logits;
};

enum class LatentPolicy : std::uint8_t {
  kSample,  ///< z = mu + sigma * eps, eps ~ N(0, I)
  kMean,    ///< z = mu
};

template <typename S>
using ParamVars = std::array<Var<S>, kParamCount>;

template <typename S>
ParamVars<S> register_params(Tape<S>& tape, const ModelParams<S>& params,
                             bool requires_grad);

template <typename S>
inline const Var<S>& pv(const ParamVars<S>& vars, Param p) {
  return vars[static_cast<std::size_t>(p)];
}

/// Graph handles of one forward pass.
template <typename S>
struct WindowGraph {
  Var<S> H;
  Var<S> mu;
  Var<S> sigma;
  Var<S> z;
  Var<S> recon;
  Var<S> A;
  Var<S> refined;
  Var<S> logits;
  Tensor<S> eps;
  bool has_latent = false;
  bool has_recon = false;
};

namespace graph {

/// Input projection followed by a single-layer GRU over the rows of X:
///   r_t = sig(x_t Wr + h Ur + br), u_t = sig(x_t Wz + h Uz + bz),
///   n_t = tanh(x_t Wn + (r_t * h) Un + bn), h_t = (1 - u_t) n_t + u_t h.
template <typename S>
Var<S> gru(const ParamVars<S>& p, const Var<S>& X, const Var<S>& h_init);

/// Per-frame encoder: one ReLU hidden layer, then linear mu and log-variance
/// heads. Returns (mu, sigma) with sigma = exp(logvar / 2).
template <typename S>
std::pair<Var<S>, Var<S>> encode(const ParamVars<S>& p, const Var<S>& X);

/// Per-frame decoder: ReLU hidden layer then linear output in feature space.
template <typename S>
Var<S> decode(const ParamVars<S>& p, const Var<S>& z);

/// softmax(f_q(z) H^T / sqrt(alpha) + M) H.
template <typename S>
Var<S> attention(const ParamVars<S>& p, const Var<S>& z, const Var<S>& H,
                 const Tensor<S>& mask, double alpha);

/// Whole network over the rows of X with the given mask. `rng` is only drawn
/// from under LatentPolicy::kSample in latent modes.
template <typename S>
WindowGraph<S> forward(Tape<S>& tape, const ParamVars<S>& p,
                       const ModelConfig& config, const Tensor<S>& X,
                       const TemporalMask& mask, LatentPolicy policy,
                       Xoshiro256pp& rng);

}  // namespace graph

// Tape-free entry points, one per model stage.

template <typename S>
Tensor<S> gru_forward(const ModelParams<S>& params, const Tensor<S>& X,
                      const Tensor<S>& h_init = {});

template <typename S>
std::pair<Tensor<S>, Tensor<S>> prob_encode(const ModelParams<S>& params,
                                            const Tensor<S>& X);

/// Returns (z, eps).
template <typename S>
std::pair<Tensor<S>, Tensor<S>> reparameterize(const Tensor<S>& mu,
                                               const Tensor<S>& sigma,
                                               Xoshiro256pp& rng);

template <typename S>
Tensor<S> prob_decode(const ModelParams<S>& params, const Tensor<S>& z);

template <typename S>
Tensor<S> tma_attention(const ModelParams<S>& params, const Tensor<S>& z,
                        const Tensor<S>& H, const TemporalMask& mask,
                        double alpha);

/// One training-style pass over a T-row window (z sampled).
template <typename S>
ForwardTrace<S> forward_window(const ModelParams<S>& params,
                               const ModelConfig& config, const Tensor<S>& X,
                               Xoshiro256pp& rng,
                               LatentPolicy policy = LatentPolicy::kSample);

/// Left-pads `rows` (fewer than or exactly `window` rows of width `cols`)
/// with zero rows; returns the padded matrix and per-row validity flags.
template <typename S>
std::pair<Tensor<S>, std::vector<std::uint8_t>> pad_window(const Tensor<S>& rows,
                                                           std::size_t window);

}  // namespace ptma
