// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ptma/tensor.hpp"

namespace ptma {

/// Additive mask value for blocked attention entries. A finite sentinel keeps
/// the max-shift in softmax well defined; exp() of it underflows to exactly 0.
inline constexpr double kMaskSentinel = -1e30;

enum class OpKind : std::uint8_t {
  kLeaf,
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kAffine,
  kSigmoid,
  kTanh,
  kRelu,
  kExp,
  kLog,
  kSquare,
  kMaskedSoftmax,
  kLogSoftmax,
  kConcat,
  kSlice,
  kSum,
  kMean,
  kTranspose,
};

std::string_view op_name(OpKind kind);

template <typename S>
class Tape;

/// Handle to a value recorded on a tape. Cheap to copy; valid until the tape
/// is cleared.
template <typename S>
class Var {
 public:
  Var() = default;

  const Tensor<S>& value() const;
  bool requires_grad() const;
  std::size_t id() const { return id_; }
  Tape<S>* tape() const { return tape_; }
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Tape<S>;
  Var(Tape<S>* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape<S>* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Gradients of a scalar loss with respect to every leaf that requires grad.
/// Leaves the loss does not depend on get an all-zero entry.
template <typename S>
class Gradients {
 public:
  const Tensor<S>& at(const Var<S>& leaf) const { return at(leaf.id()); }
  const Tensor<S>& at(std::size_t leaf_id) const;
  bool contains(std::size_t leaf_id) const { return grads_.contains(leaf_id); }
  std::size_t size() const { return grads_.size(); }

 private:
  friend class Tape<S>;
  std::unordered_map<std::size_t, Tensor<S>> grads_;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, which is a
/// topological order of the graph; backward walks it once in reverse.
template <typename S>
class Tape {
 public:
  Tape();

  Var<S> leaf(Tensor<S> value, bool requires_grad = true);
  Var<S> constant(Tensor<S> value) { return leaf(std::move(value), false); }

  /// Gradients of `loss` (must be 1x1). Clears the tape afterwards.
  Gradients<S> backward(const Var<S>& loss);

  void clear() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

  /// Fail with NumericError when an op turns finite inputs into NaN/Inf.
  /// On by default in builds without NDEBUG.
  void set_check_finite(bool on) { check_finite_ = on; }

  // Internal: used by the op functions below.
  struct Node {
    OpKind op = OpKind::kLeaf;
    std::vector<std::size_t> inputs;
    Tensor<S> value;
    double scale = 1.0;
    double shift = 0.0;
    std::size_t axis = 0;
    std::size_t begin = 0;
    bool requires_grad = false;
  };

  const Node& node(std::size_t id) const { return nodes_[id]; }
  Var<S> record(Node node);

 private:
  void accumulate(std::vector<Tensor<S>>& grads, std::size_t id,
                  const Tensor<S>& g) const;
  void accumulate_broadcast(std::vector<Tensor<S>>& grads, std::size_t id,
                            const Tensor<S>& g) const;

  std::vector<Node> nodes_;
  bool check_finite_ = false;
};

template <typename S>
const Tensor<S>& Var<S>::value() const {
  return tape_->node(id_).value;
}

template <typename S>
bool Var<S>::requires_grad() const {
  return tape_->node(id_).requires_grad;
}

// Op catalog. Elementwise binary ops accept equal shapes or a 1xN operand
// broadcast over the rows of an MxN operand; nothing else broadcasts.

template <typename S>
Var<S> matmul(const Var<S>& a, const Var<S>& b);
template <typename S>
Var<S> add(const Var<S>& a, const Var<S>& b);
template <typename S>
Var<S> sub(const Var<S>& a, const Var<S>& b);
template <typename S>
Var<S> mul(const Var<S>& a, const Var<S>& b);
/// scale * a + shift
template <typename S>
Var<S> affine(const Var<S>& a, double scale, double shift = 0.0);
template <typename S>
Var<S> sigmoid(const Var<S>& a);
template <typename S>
Var<S> tanh(const Var<S>& a);
template <typename S>
Var<S> relu(const Var<S>& a);
template <typename S>
Var<S> exp(const Var<S>& a);
template <typename S>
Var<S> log(const Var<S>& a);
template <typename S>
Var<S> square(const Var<S>& a);
/// Row-wise softmax of (logits + mask). `mask` is additive and either empty
/// (no mask) or the same shape as `logits`.
template <typename S>
Var<S> masked_softmax(const Var<S>& logits, const Tensor<S>& mask = {});
template <typename S>
Var<S> log_softmax(const Var<S>& logits);
template <typename S>
Var<S> concat(std::span<const Var<S>> parts, std::size_t axis);
/// Half-open range [begin, end) along `axis`.
template <typename S>
Var<S> slice(const Var<S>& a, std::size_t axis, std::size_t begin,
             std::size_t end);
template <typename S>
Var<S> sum(const Var<S>& a);
template <typename S>
Var<S> mean(const Var<S>& a);
template <typename S>
Var<S> transpose(const Var<S>& a);

// Plain (tape-free) kernels shared by the ops and by inference code.

/// a (m x k) times b (k x n).
template <typename S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b);
template <typename S>
Tensor<S> transpose(const Tensor<S>& a);
/// Row-wise softmax of logits + mask (mask may be empty).
template <typename S>
Tensor<S> softmax_rows(const Tensor<S>& logits, const Tensor<S>& mask = {});

}  // namespace ptma
