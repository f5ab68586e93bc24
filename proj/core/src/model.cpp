// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include "ptma/model.hpp"

#include <cmath>
#include <tuple>

namespace ptma {

namespace {

constexpr std::array<std::string_view, kParamCount> kParamNames = {
    "input.weight",  "input.bias",    "gru.w_update", "gru.w_reset",
    "gru.w_cand",    "gru.u_update",  "gru.u_reset",  "gru.u_cand",
    "gru.b_update",  "gru.b_reset",   "gru.b_cand",   "encoder.weight",
    "encoder.bias",  "mu.weight",     "mu.bias",      "logvar.weight",
    "logvar.bias",   "decoder.weight1", "decoder.bias1", "decoder.weight2",
    "decoder.bias2", "query.weight",  "query.bias",   "classifier.weight",
    "classifier.bias",
};

}  // namespace

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kBaselineGru: return "baseline-gru";
    case Mode::kQueryOnly: return "query-only";
    case Mode::kAe: return "ae";
    case Mode::kKldOnly: return "kld-only";
    case Mode::kFull: return "full";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::kBaselineGru, Mode::kQueryOnly, Mode::kAe, Mode::kKldOnly,
                 Mode::kFull}) {
    if (mode_name(m) == name) return m;
  }
  throw ConfigError("unknown mode '" + std::string(name) +
                    "' (expected baseline-gru, query-only, ae, kld-only or full)");
}

void ModelConfig::validate() const {
  auto require = [](std::size_t v, const char* what) {
    if (v == 0) throw ConfigError(std::string("model config: ") + what + " must be >= 1");
  };
  require(feature_dim, "feature_dim");
  require(embed_dim, "embed_dim");
  require(latent_dim, "latent_dim");
  require(num_classes, "num_classes");
  require(window, "window");
  require(enc_hidden, "enc_hidden");
  require(dec_hidden, "dec_hidden");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("model config: alpha must be > 0 (or 0 for embed_dim)");
  }
  if (static_cast<unsigned>(mode) > static_cast<unsigned>(Mode::kFull)) {
    throw ConfigError("model config: invalid mode");
  }
}

std::string_view param_name(std::size_t index) { return kParamNames.at(index); }
std::string_view param_name(Param p) { return param_name(static_cast<std::size_t>(p)); }

std::array<Shape, kParamCount> param_shapes(const ModelConfig& c) {
  const std::size_t D = c.feature_dim, E = c.embed_dim, Z = c.latent_dim;
  const std::size_t He = c.enc_hidden, Hd = c.dec_hidden, K = c.num_outputs();
  auto m = [](std::size_t r, std::size_t k) { return Shape{r, k}; };
  return {
      m(D, E),  m(1, E),  m(E, E),  m(E, E),  m(E, E),  m(E, E),  m(E, E),
      m(E, E),  m(1, E),  m(1, E),  m(1, E),  m(D, He), m(1, He), m(He, Z),
      m(1, Z),  m(He, Z), m(1, Z),  m(Z, Hd), m(1, Hd), m(Hd, D), m(1, D),
      m(Z, E),  m(1, E),  m(E, K),  m(1, K),
  };
}

template <typename S>
ModelParams<S> ModelParams<S>::zeros(const ModelConfig& config) {
  config.validate();
  const auto shapes = param_shapes(config);
  ModelParams<S> out;
  for (std::size_t i = 0; i < kParamCount; ++i) out.tensors[i] = Tensor<S>(shapes[i]);
  return out;
}

template <typename S>
ModelParams<S> ModelParams<S>::initialize(const ModelConfig& config,
                                          std::uint64_t seed) {
  ModelParams<S> out = zeros(config);
  Xoshiro256pp rng = Xoshiro256pp::stream(seed, StreamPurpose::kInit);
  for (auto& t : out.tensors) {
    if (t.rows() == 1) continue;  // biases start at zero
    const double bound = 1.0 / std::sqrt(static_cast<double>(t.rows()));
    for (auto& v : t.data()) v = static_cast<S>(rng.uniform(-bound, bound));
  }
  return out;
}

template <typename S>
bool ModelParams<S>::all_finite() const {
  for (const auto& t : tensors) {
    if (!t.all_finite()) return false;
  }
  return true;
}

template <typename S>
void ModelParams<S>::check_shapes(const ModelConfig& config) const {
  const auto shapes = param_shapes(config);
  for (std::size_t i = 0; i < kParamCount; ++i) {
    if (tensors[i].shape() != shapes[i]) {
      throw ShapeError("parameter " + std::string(param_name(i)) + " has shape " +
                       shape_str(tensors[i].shape()) + ", config expects " +
                       shape_str(shapes[i]));
    }
  }
}

TemporalMask::TemporalMask(std::size_t window, std::size_t length)
    : window_(window), length_(length) {
  if (window == 0 || length == 0) {
    throw ConfigError("temporal mask: window and length must be >= 1");
  }
}

template <typename S>
Tensor<S> TemporalMask::additive() const {
  Tensor<S> out = Tensor<S>::matrix(length_, length_);
  for (std::size_t i = 0; i < length_; ++i) {
    for (std::size_t j = 0; j < length_; ++j) out(i, j) = static_cast<S>(value(i, j));
  }
  return out;
}

TemporalMask build_temporal_mask(std::size_t window, std::size_t length) {
  return TemporalMask(window, length);
}

template <typename S>
ParamVars<S> register_params(Tape<S>& tape, const ModelParams<S>& params,
                             bool requires_grad) {
  ParamVars<S> vars;
  for (std::size_t i = 0; i < kParamCount; ++i) {
    vars[i] = tape.leaf(params.tensors[i], requires_grad);
  }
  return vars;
}

namespace graph {

template <typename S>
Var<S> linear(const Var<S>& x, const Var<S>& w, const Var<S>& b) {
  return add(matmul(x, w), b);
}

template <typename S>
Var<S> gru(const ParamVars<S>& p, const Var<S>& X, const Var<S>& h_init) {
  using P = Param;
  const Var<S> projected = linear(X, pv(p, P::kInputW), pv(p, P::kInputB));
  const Var<S> xu = linear(projected, pv(p, P::kGruWz), pv(p, P::kGruBz));
  const Var<S> xr = linear(projected, pv(p, P::kGruWr), pv(p, P::kGruBr));
  const Var<S> xn = linear(projected, pv(p, P::kGruWn), pv(p, P::kGruBn));

  const std::size_t steps = X.value().rows();
  std::vector<Var<S>> hidden;
  hidden.reserve(steps);
  Var<S> h = h_init;
  for (std::size_t t = 0; t < steps; ++t) {
    const Var<S> update =
        sigmoid(add(slice(xu, 0, t, t + 1), matmul(h, pv(p, P::kGruUz))));
    const Var<S> reset =
        sigmoid(add(slice(xr, 0, t, t + 1), matmul(h, pv(p, P::kGruUr))));
    const Var<S> cand =
        tanh(add(slice(xn, 0, t, t + 1), matmul(mul(reset, h), pv(p, P::kGruUn))));
    h = add(cand, mul(update, sub(h, cand)));
    hidden.push_back(h);
  }
  return concat<S>(hidden, 0);
}

template <typename S>
std::pair<Var<S>, Var<S>> encode(const ParamVars<S>& p, const Var<S>& X) {
  using P = Param;
  const Var<S> trunk = relu(linear(X, pv(p, P::kEncW), pv(p, P::kEncB)));
  const Var<S> mu = linear(trunk, pv(p, P::kMuW), pv(p, P::kMuB));
  const Var<S> logvar = linear(trunk, pv(p, P::kLogVarW), pv(p, P::kLogVarB));
  return {mu, exp(affine(logvar, 0.5))};
}

template <typename S>
Var<S> decode(const ParamVars<S>& p, const Var<S>& z) {
  using P = Param;
  const Var<S> hidden = relu(linear(z, pv(p, P::kDecW1), pv(p, P::kDecB1)));
  return linear(hidden, pv(p, P::kDecW2), pv(p, P::kDecB2));
}

template <typename S>
Var<S> attention(const ParamVars<S>& p, const Var<S>& z, const Var<S>& H,
                 const Tensor<S>& mask, double alpha) {
  using P = Param;
  if (mask.rows() != H.value().rows() || mask.cols() != H.value().rows()) {
    throw ShapeError("attention: mask " + shape_str(mask.shape()) +
                     " does not match " + std::to_string(H.value().rows()) +
                     " time steps");
  }
  const Var<S> queries = linear(z, pv(p, P::kQueryW), pv(p, P::kQueryB));
  const Var<S> scores = affine(matmul(queries, transpose(H)), 1.0 / std::sqrt(alpha));
  return matmul(masked_softmax(scores, mask), H);
}

template <typename S>
WindowGraph<S> forward(Tape<S>& tape, const ParamVars<S>& p,
                       const ModelConfig& config, const Tensor<S>& X,
                       const TemporalMask& mask, LatentPolicy policy,
                       Xoshiro256pp& rng) {
  if (X.rank() != 2 || X.cols() != config.feature_dim) {
    throw ShapeError("forward: features " + shape_str(X.shape()) +
                     " do not have " + std::to_string(config.feature_dim) +
                     " columns");
  }
  if (mask.length() != X.rows()) {
    throw ShapeError("forward: mask length " + std::to_string(mask.length()) +
                     " != " + std::to_string(X.rows()) + " rows");
  }
  const std::size_t steps = X.rows();
  WindowGraph<S> g;
  const Var<S> x = tape.constant(X);
  g.H = gru(p, x, tape.constant(Tensor<S>::matrix(1, config.embed_dim)));

  if (!uses_latent(config.mode)) {
    g.A = tape.constant(Tensor<S>::matrix(steps, config.embed_dim));
    g.refined = g.H;
  } else {
    g.has_latent = true;
    std::tie(g.mu, g.sigma) = encode(p, x);
    g.eps = Tensor<S>::matrix(steps, config.latent_dim);
    if (policy == LatentPolicy::kSample) {
      for (auto& v : g.eps.data()) v = static_cast<S>(rng.normal());
      g.z = add(g.mu, mul(g.sigma, tape.constant(g.eps)));
    } else {
      g.z = g.mu;
    }
    if (uses_decoder(config.mode)) {
      g.has_recon = true;
      g.recon = decode(p, g.z);
    }
    g.A = attention(p, g.z, g.H, mask.template additive<S>(), config.temperature());
    g.refined = add(g.H, g.A);
  }
  g.logits = linear(g.refined, pv(p, Param::kClsW), pv(p, Param::kClsB));
  return g;
}

}  // namespace graph

template <typename S>
Tensor<S> gru_forward(const ModelParams<S>& params, const Tensor<S>& X,
                      const Tensor<S>& h_init) {
  Tape<S> tape;
  const auto p = register_params(tape, params, false);
  const std::size_t E = params[Param::kGruUz].rows();
  Tensor<S> h0 = h_init.empty() ? Tensor<S>::matrix(1, E) : h_init;
  if (h0.shape() != Shape{1, E}) {
    throw ShapeError("gru_forward: h_init must be 1x" + std::to_string(E));
  }
  return graph::gru(p, tape.constant(X), tape.constant(std::move(h0))).value();
}

template <typename S>
std::pair<Tensor<S>, Tensor<S>> prob_encode(const ModelParams<S>& params,
                                            const Tensor<S>& X) {
  Tape<S> tape;
  const auto p = register_params(tape, params, false);
  auto [mu, sigma] = graph::encode(p, tape.constant(X));
  return {mu.value(), sigma.value()};
}

template <typename S>
std::pair<Tensor<S>, Tensor<S>> reparameterize(const Tensor<S>& mu,
                                               const Tensor<S>& sigma,
                                               Xoshiro256pp& rng) {
  if (mu.shape() != sigma.shape()) {
    throw ShapeError("reparameterize: mu " + shape_str(mu.shape()) + " vs sigma " +
                     shape_str(sigma.shape()));
  }
  Tensor<S> eps(mu.shape());
  Tensor<S> z(mu.shape());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(sigma[i] > S{0})) throw NumericError("reparameterize: sigma must be > 0");
    eps[i] = static_cast<S>(rng.normal());
    z[i] = mu[i] + sigma[i] * eps[i];
  }
  return {std::move(z), std::move(eps)};
}

template <typename S>
Tensor<S> prob_decode(const ModelParams<S>& params, const Tensor<S>& z) {
  Tape<S> tape;
  const auto p = register_params(tape, params, false);
  return graph::decode(p, tape.constant(z)).value();
}

template <typename S>
Tensor<S> tma_attention(const ModelParams<S>& params, const Tensor<S>& z,
                        const Tensor<S>& H, const TemporalMask& mask,
                        double alpha) {
  Tape<S> tape;
  const auto p = register_params(tape, params, false);
  return graph::attention(p, tape.constant(z), tape.constant(H),
                          mask.template additive<S>(), alpha)
      .value();
}

template <typename S>
ForwardTrace<S> forward_window(const ModelParams<S>& params,
                               const ModelConfig& config, const Tensor<S>& X,
                               Xoshiro256pp& rng, LatentPolicy policy) {
  config.validate();
  params.check_shapes(config);
  if (X.rows() != config.window) {
    throw ShapeError("forward_window: expected " + std::to_string(config.window) +
                     " rows, got " + shape_str(X.shape()) + " (pad short inputs)");
  }
  Tape<S> tape;
  const auto p = register_params(tape, params, false);
  const auto g = graph::forward(tape, p, config, X,
                                build_temporal_mask(config.window, X.rows()), policy, rng);
  ForwardTrace<S> trace;
  trace.H = g.H.value();
  trace.A = g.A.value();
  trace.refined = g.refined.value();
  trace.logits = g.logits.value();
  if (g.has_latent) {
    trace.mu = g.mu.value();
    trace.sigma = g.sigma.value();
    trace.z = g.z.value();
    trace.eps = g.eps;
  }
  if (g.has_recon) trace.recon = g.recon.value();
  return trace;
}

template <typename S>
std::pair<Tensor<S>, std::vector<std::uint8_t>> pad_window(const Tensor<S>& rows,
                                                           std::size_t window) {
  if (rows.rows() > window) {
    throw ShapeError("pad_window: " + std::to_string(rows.rows()) +
                     " rows exceed window " + std::to_string(window));
  }
  const std::size_t pad = window - rows.rows();
  Tensor<S> out = Tensor<S>::matrix(window, rows.cols());
  std::vector<std::uint8_t> valid(window, 0);
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    valid[pad + r] = 1;
    for (std::size_t c = 0; c < rows.cols(); ++c) out(pad + r, c) = rows(r, c);
  }
  return {std::move(out), std::move(valid)};
}

#define PTMA_INSTANTIATE_MODEL(S)                                                  \
  template struct ModelParams<S>;                                                  \
  template Tensor<S> TemporalMask::additive<S>() const;                           \
  template ParamVars<S> register_params(Tape<S>&, const ModelParams<S>&, bool);    \
  template Var<S> graph::gru(const ParamVars<S>&, const Var<S>&, const Var<S>&);   \
  template std::pair<Var<S>, Var<S>> graph::encode(const ParamVars<S>&,            \
                                                   const Var<S>&);                 \
  template Var<S> graph::decode(const ParamVars<S>&, const Var<S>&);               \
  template Var<S> graph::attention(const ParamVars<S>&, const Var<S>&,             \
                                   const Var<S>&, const Tensor<S>&, double);       \
  template WindowGraph<S> graph::forward(Tape<S>&, const ParamVars<S>&,            \
                                         const ModelConfig&, const Tensor<S>&,     \
                                         const TemporalMask&, LatentPolicy,        \
                                         Xoshiro256pp&);                           \
  template Tensor<S> gru_forward(const ModelParams<S>&, const Tensor<S>&,          \
                                 const Tensor<S>&);                                \
  template std::pair<Tensor<S>, Tensor<S>> prob_encode(const ModelParams<S>&,      \
                                                       const Tensor<S>&);          \
  template std::pair<Tensor<S>, Tensor<S>> reparameterize(                         \
      const Tensor<S>&, const Tensor<S>&, Xoshiro256pp&);                          \
  template Tensor<S> prob_decode(const ModelParams<S>&, const Tensor<S>&);         \
  template Tensor<S> tma_attention(const ModelParams<S>&, const Tensor<S>&,        \
                                   const Tensor<S>&, const TemporalMask&, double); \
  template ForwardTrace<S> forward_window(const ModelParams<S>&,                   \
                                          const ModelConfig&, const Tensor<S>&,    \
                                          Xoshiro256pp&, LatentPolicy);            \
  template std::pair<Tensor<S>, std::vector<std::uint8_t>> pad_window(             \
      const Tensor<S>&, std::size_t);

PTMA_INSTANTIATE_MODEL(float)
PTMA_INSTANTIATE_MODEL(double)

#undef PTMA_INSTANTIATE_MODEL

}  // namespace ptma
