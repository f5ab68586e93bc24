// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include "ptma/tape.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ptma {

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kAffine: return "affine";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kTanh: return "tanh";
    case OpKind::kRelu: return "relu";
    case OpKind::kExp: return "exp";
    case OpKind::kLog: return "log";
    case OpKind::kSquare: return "square";
    case OpKind::kMaskedSoftmax: return "masked_softmax";
    case OpKind::kLogSoftmax: return "log_softmax";
    case OpKind::kConcat: return "concat";
    case OpKind::kSlice: return "slice";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
    case OpKind::kTranspose: return "transpose";
  }
  return "?";
}

namespace {

void require_rank2(std::string_view op, const Shape& shape) {
  if (shape.size() != 2) {
    throw ShapeError(std::string(op) + ": expected a rank-2 tensor, got " +
                     shape_str(shape));
  }
}

template <typename S>
Tape<S>& same_tape(std::string_view op, const Var<S>& a, const Var<S>& b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw std::invalid_argument(std::string(op) +
                                ": operands live on different tapes");
  }
  return *a.tape();
}

template <typename S>
Tape<S>& tape_of(const Var<S>& a) {
  if (a.tape() == nullptr) throw std::invalid_argument("op on a null Var");
  return *a.tape();
}

// Output shape of an elementwise binary op under the leading-1 rule.
Shape broadcast_shape(std::string_view op, const Shape& a, const Shape& b) {
  if (a == b) return a;
  if (a.size() == 2 && b.size() == 2 && a[1] == b[1]) {
    if (a[0] == 1) return b;
    if (b[0] == 1) return a;
  }
  throw ShapeError(std::string(op) + ": cannot broadcast " + shape_str(a) +
                   " with " + shape_str(b));
}

// Element (r, c) of `t` viewed at output shape `out_cols` wide.
template <typename S>
inline S at_broadcast(const Tensor<S>& t, std::size_t flat, std::size_t cols) {
  if (t.size() == 0) return S{0};
  return t.rows() == 1 && t.rank() == 2 ? t[flat % cols] : t[flat];
}

template <typename S, typename F>
Tensor<S> map_unary(const Tensor<S>& a, F f) {
  Tensor<S> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

template <typename S, typename F>
Tensor<S> map_binary(std::string_view op, const Tensor<S>& a,
                     const Tensor<S>& b, F f) {
  const Shape shape = broadcast_shape(op, a.shape(), b.shape());
  Tensor<S> out(shape);
  const std::size_t cols = shape.size() == 2 ? shape[1] : out.size();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = f(at_broadcast(a, i, cols), at_broadcast(b, i, cols));
  }
  return out;
}

template <typename S>
typename Tape<S>::Node make_node(OpKind op, std::vector<std::size_t> inputs,
                                 Tensor<S> value) {
  typename Tape<S>::Node node;
  node.op = op;
  node.inputs = std::move(inputs);
  node.value = std::move(value);
  return node;
}

template <typename S>
Var<S> unary(OpKind op, const Var<S>& a, Tensor<S> value) {
  return tape_of(a).record(make_node<S>(op, {a.id()}, std::move(value)));
}

}  // namespace

template <typename S>
Tape<S>::Tape() {
#ifndef NDEBUG
  check_finite_ = true;
#endif
}

template <typename S>
const Tensor<S>& Gradients<S>::at(std::size_t leaf_id) const {
  auto it = grads_.find(leaf_id);
  if (it == grads_.end()) {
    throw std::out_of_range("gradients: node " + std::to_string(leaf_id) +
                            " is not a leaf requiring grad");
  }
  return it->second;
}

template <typename S>
Var<S> Tape<S>::leaf(Tensor<S> value, bool requires_grad) {
  Node node;
  node.op = OpKind::kLeaf;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var<S>(this, nodes_.size() - 1);
}

template <typename S>
Var<S> Tape<S>::record(Node node) {
  bool any_grad = false;
  bool inputs_finite = true;
  for (auto id : node.inputs) {
    any_grad = any_grad || nodes_[id].requires_grad;
    if (check_finite_) inputs_finite = inputs_finite && nodes_[id].value.all_finite();
  }
  if (check_finite_ && inputs_finite && !node.value.all_finite()) {
    std::string msg = "non-finite output from ";
    msg += op_name(node.op);
    for (auto id : node.inputs) msg += " " + shape_str(nodes_[id].value.shape());
    throw NumericError(msg);
  }
  node.requires_grad = any_grad;
  nodes_.push_back(std::move(node));
  return Var<S>(this, nodes_.size() - 1);
}

template <typename S>
void Tape<S>::accumulate(std::vector<Tensor<S>>& grads, std::size_t id,
                         const Tensor<S>& g) const {
  auto& slot = grads[id];
  if (slot.empty()) {
    slot = g;
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) slot[i] += g[i];
}

template <typename S>
void Tape<S>::accumulate_broadcast(std::vector<Tensor<S>>& grads,
                                   std::size_t id, const Tensor<S>& g) const {
  const Shape& target = nodes_[id].value.shape();
  if (target == g.shape()) {
    accumulate(grads, id, g);
    return;
  }
  // target is 1xN, g is MxN: reduce over rows.
  Tensor<S> reduced(target);
  const std::size_t cols = g.cols();
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) reduced[c] += g(r, c);
  }
  accumulate(grads, id, reduced);
}

template <typename S>
Gradients<S> Tape<S>::backward(const Var<S>& loss) {
  if (nodes_.empty()) throw std::logic_error("backward: tape is empty");
  if (loss.tape() != this) {
    throw std::invalid_argument("backward: loss belongs to another tape");
  }
  if (loss.value().size() != 1) {
    throw ShapeError("backward: loss must be scalar, got " +
                     shape_str(loss.value().shape()));
  }

  std::vector<Tensor<S>> grads(nodes_.size());
  grads[loss.id()] = Tensor<S>(loss.value().shape(), S{1});

  for (std::size_t idx = loss.id() + 1; idx-- > 0;) {
    const Node& n = nodes_[idx];
    if (n.op == OpKind::kLeaf || !n.requires_grad || grads[idx].empty()) {
      continue;
    }
    const Tensor<S>& g = grads[idx];
    const Tensor<S>& y = n.value;
    auto needs = [&](std::size_t k) {
      return nodes_[n.inputs[k]].requires_grad;
    };
    auto in = [&](std::size_t k) -> const Tensor<S>& {
      return nodes_[n.inputs[k]].value;
    };

    switch (n.op) {
      case OpKind::kLeaf:
        break;
      case OpKind::kMatMul: {
        if (needs(0)) accumulate(grads, n.inputs[0], matmul(g, transpose(in(1))));
        if (needs(1)) accumulate(grads, n.inputs[1], matmul(transpose(in(0)), g));
        break;
      }
      case OpKind::kAdd:
      case OpKind::kSub: {
        if (needs(0)) accumulate_broadcast(grads, n.inputs[0], g);
        if (needs(1)) {
          if (n.op == OpKind::kAdd) {
            accumulate_broadcast(grads, n.inputs[1], g);
          } else {
            accumulate_broadcast(grads, n.inputs[1],
                                 map_unary(g, [](S v) { return -v; }));
          }
        }
        break;
      }
      case OpKind::kMul: {
        const std::size_t cols = g.cols();
        for (std::size_t k = 0; k < 2; ++k) {
          if (!needs(k)) continue;
          const Tensor<S>& other = in(1 - k);
          Tensor<S> part(g.shape());
          for (std::size_t i = 0; i < g.size(); ++i) {
            part[i] = g[i] * at_broadcast(other, i, cols);
          }
          accumulate_broadcast(grads, n.inputs[k], part);
        }
        break;
      }
      case OpKind::kAffine: {
        const S scale = static_cast<S>(n.scale);
        accumulate(grads, n.inputs[0], map_unary(g, [scale](S v) { return scale * v; }));
        break;
      }
      case OpKind::kSigmoid: {
        Tensor<S> d(g.shape());
        for (std::size_t i = 0; i < g.size(); ++i) d[i] = g[i] * y[i] * (S{1} - y[i]);
        accumulate(grads, n.inputs[0], d);
        break;
      }
      case OpKind::kTanh: {
        Tensor<S> d(g.shape());
        for (std::size_t i = 0; i < g.size(); ++i) d[i] = g[i] * (S{1} - y[i] * y[i]);
        accumulate(grads, n.inputs[0], d);
        break;
      }
      case OpKind::kRelu: {
        const Tensor<S>& x = in(0);
        Tensor<S> d(g.shape());
        for (std::size_t i = 0; i < g.size(); ++i) d[i] = x[i] > S{0} ? g[i] : S{0};
        accumulate(grads, n.inputs[0], d);
        break;
      }
      case OpKind::kExp: {
        Tensor<S> d(g.shape());
        for (std::size_t i = 0; i < g.size(); ++i) d[i] = g[i] * y[i];
        accumulate(grads, n.inputs[0], d);
        break;
      }
      case OpKind::kLog: {
        const Tensor<S>& x = in(0);
        Tensor<S> d(g.shape());
        for (std::size_t i = 0; i < g.size(); ++i) d[i] = g[i] / x[i];
        accumulate(grads, n.inputs[0], d);
        break;
      }
      case OpKind::kSquare: {
        const Tensor<S>& x = in(0);
        Tensor<S> d(g.shape());
        for (std::size_t i = 0; i < g.size(); ++i) d[i] = S{2} * x[i] * g[i];
        accumulate(grads, n.inputs[0], d);
        break;
      }
      case OpKind::kMaskedSoftmax: {
        Tensor<S> d(g.shape());
        for (std::size_t r = 0; r < g.rows(); ++r) {
          S dot{0};
          for (std::size_t c = 0; c < g.cols(); ++c) dot += g(r, c) * y(r, c);
          for (std::size_t c = 0; c < g.cols(); ++c) d(r, c) = y(r, c) * (g(r, c) - dot);
        }
        accumulate(grads, n.inputs[0], d);
        break;
      }
      case OpKind::kLogSoftmax: {
        Tensor<S> d(g.shape());
        for (std::size_t r = 0; r < g.rows(); ++r) {
          S total{0};
          for (std::size_t c = 0; c < g.cols(); ++c) total += g(r, c);
          for (std::size_t c = 0; c < g.cols(); ++c) {
            d(r, c) = g(r, c) - std::exp(y(r, c)) * total;
          }
        }
        accumulate(grads, n.inputs[0], d);
        break;
      }
      case OpKind::kConcat: {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          const Tensor<S>& part = in(k);
          const std::size_t extent = n.axis == 0 ? part.rows() : part.cols();
          if (needs(k)) {
            Tensor<S> d(part.shape());
            for (std::size_t r = 0; r < part.rows(); ++r) {
              for (std::size_t c = 0; c < part.cols(); ++c) {
                d(r, c) = n.axis == 0 ? g(offset + r, c) : g(r, offset + c);
              }
            }
            accumulate(grads, n.inputs[k], d);
          }
          offset += extent;
        }
        break;
      }
      case OpKind::kSlice: {
        Tensor<S> d(in(0).shape());
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < g.cols(); ++c) {
            if (n.axis == 0) {
              d(n.begin + r, c) = g(r, c);
            } else {
              d(r, n.begin + c) = g(r, c);
            }
          }
        }
        accumulate(grads, n.inputs[0], d);
        break;
      }
      case OpKind::kSum:
      case OpKind::kMean: {
        const Tensor<S>& x = in(0);
        S v = g[0];
        if (n.op == OpKind::kMean) v /= static_cast<S>(x.size());
        accumulate(grads, n.inputs[0], Tensor<S>(x.shape(), v));
        break;
      }
      case OpKind::kTranspose: {
        accumulate(grads, n.inputs[0], transpose(g));
        break;
      }
    }
  }

  Gradients<S> out;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    if (n.op != OpKind::kLeaf || !n.requires_grad) continue;
    out.grads_.emplace(id, grads[id].empty() ? Tensor<S>(n.value.shape())
                                             : std::move(grads[id]));
  }
  nodes_.clear();
  return out;
}

// ---------------------------------------------------------------- kernels

template <typename S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  require_rank2("matmul", a.shape());
  require_rank2("matmul", b.shape());
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner extents differ, " + shape_str(a.shape()) +
                     " x " + shape_str(b.shape()));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor<S> out = Tensor<S>::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    S* out_row = out.data().data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const S av = a(i, p);
      if (av == S{0}) continue;
      const S* b_row = b.data().data() + p * n;
      for (std::size_t j = 0; j < n; ++j) out_row[j] += av * b_row[j];
    }
  }
  return out;
}

template <typename S>
Tensor<S> transpose(const Tensor<S>& a) {
  require_rank2("transpose", a.shape());
  Tensor<S> out = Tensor<S>::matrix(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  }
  return out;
}

template <typename S>
Tensor<S> softmax_rows(const Tensor<S>& logits, const Tensor<S>& mask) {
  require_rank2("softmax", logits.shape());
  if (!mask.empty() && mask.shape() != logits.shape()) {
    throw ShapeError("softmax: mask " + shape_str(mask.shape()) +
                     " does not match logits " + shape_str(logits.shape()));
  }
  Tensor<S> out(logits.shape());
  const std::size_t cols = logits.cols();
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    S peak = -std::numeric_limits<S>::infinity();
    for (std::size_t c = 0; c < cols; ++c) {
      S v = logits(r, c) + (mask.empty() ? S{0} : mask(r, c));
      out(r, c) = v;
      peak = std::max(peak, v);
    }
    S total{0};
    for (std::size_t c = 0; c < cols; ++c) {
      out(r, c) = std::exp(out(r, c) - peak);
      total += out(r, c);
    }
    for (std::size_t c = 0; c < cols; ++c) out(r, c) /= total;
  }
  return out;
}

// -------------------------------------------------------------------- ops

template <typename S>
Var<S> matmul(const Var<S>& a, const Var<S>& b) {
  Tape<S>& tape = same_tape("matmul", a, b);
  return tape.record(make_node<S>(OpKind::kMatMul, {a.id(), b.id()},
                                  matmul(a.value(), b.value())));
}

template <typename S>
Var<S> add(const Var<S>& a, const Var<S>& b) {
  Tape<S>& tape = same_tape("add", a, b);
  return tape.record(make_node<S>(
      OpKind::kAdd, {a.id(), b.id()},
      map_binary("add", a.value(), b.value(), [](S x, S y) { return x + y; })));
}

template <typename S>
Var<S> sub(const Var<S>& a, const Var<S>& b) {
  Tape<S>& tape = same_tape("sub", a, b);
  return tape.record(make_node<S>(
      OpKind::kSub, {a.id(), b.id()},
      map_binary("sub", a.value(), b.value(), [](S x, S y) { return x - y; })));
}

template <typename S>
Var<S> mul(const Var<S>& a, const Var<S>& b) {
  Tape<S>& tape = same_tape("mul", a, b);
  return tape.record(make_node<S>(
      OpKind::kMul, {a.id(), b.id()},
      map_binary("mul", a.value(), b.value(), [](S x, S y) { return x * y; })));
}

template <typename S>
Var<S> affine(const Var<S>& a, double scale, double shift) {
  const S s = static_cast<S>(scale), t = static_cast<S>(shift);
  auto node = make_node<S>(OpKind::kAffine, {a.id()},
                           map_unary(a.value(), [s, t](S v) { return s * v + t; }));
  node.scale = scale;
  node.shift = shift;
  return tape_of(a).record(std::move(node));
}

template <typename S>
Var<S> sigmoid(const Var<S>& a) {
  return unary(OpKind::kSigmoid, a, map_unary(a.value(), [](S v) {
                 // Split by sign so exp never overflows.
                 if (v >= S{0}) return S{1} / (S{1} + std::exp(-v));
                 const S e = std::exp(v);
                 return e / (S{1} + e);
               }));
}

template <typename S>
Var<S> tanh(const Var<S>& a) {
  return unary(OpKind::kTanh, a,
               map_unary(a.value(), [](S v) { return std::tanh(v); }));
}

template <typename S>
Var<S> relu(const Var<S>& a) {
  return unary(OpKind::kRelu, a,
               map_unary(a.value(), [](S v) { return v > S{0} ? v : S{0}; }));
}

template <typename S>
Var<S> exp(const Var<S>& a) {
  return unary(OpKind::kExp, a,
               map_unary(a.value(), [](S v) { return std::exp(v); }));
}

template <typename S>
Var<S> log(const Var<S>& a) {
  return unary(OpKind::kLog, a,
               map_unary(a.value(), [](S v) { return std::log(v); }));
}

template <typename S>
Var<S> square(const Var<S>& a) {
  return unary(OpKind::kSquare, a,
               map_unary(a.value(), [](S v) { return v * v; }));
}

template <typename S>
Var<S> masked_softmax(const Var<S>& logits, const Tensor<S>& mask) {
  return unary(OpKind::kMaskedSoftmax, logits, softmax_rows(logits.value(), mask));
}

template <typename S>
Var<S> log_softmax(const Var<S>& logits) {
  const Tensor<S>& x = logits.value();
  require_rank2("log_softmax", x.shape());
  Tensor<S> out(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    S peak = -std::numeric_limits<S>::infinity();
    for (std::size_t c = 0; c < x.cols(); ++c) peak = std::max(peak, x(r, c));
    S total{0};
    for (std::size_t c = 0; c < x.cols(); ++c) total += std::exp(x(r, c) - peak);
    const S log_total = std::log(total) + peak;
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = x(r, c) - log_total;
  }
  return unary(OpKind::kLogSoftmax, logits, std::move(out));
}

template <typename S>
Var<S> concat(std::span<const Var<S>> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  if (axis > 1) throw ShapeError("concat: axis must be 0 or 1");
  Tape<S>& tape = tape_of(parts[0]);
  std::vector<std::size_t> ids;
  const Shape& first = parts[0].value().shape();
  require_rank2("concat", first);
  std::size_t along = 0;
  for (const auto& p : parts) {
    same_tape("concat", parts[0], p);
    const Shape& s = p.value().shape();
    require_rank2("concat", s);
    if (s[1 - axis] != first[1 - axis]) {
      throw ShapeError("concat: " + shape_str(s) + " does not line up with " +
                       shape_str(first) + " on axis " + std::to_string(axis));
    }
    along += s[axis];
    ids.push_back(p.id());
  }
  Tensor<S> out = axis == 0 ? Tensor<S>::matrix(along, first[1])
                            : Tensor<S>::matrix(first[0], along);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const Tensor<S>& v = p.value();
    for (std::size_t r = 0; r < v.rows(); ++r) {
      for (std::size_t c = 0; c < v.cols(); ++c) {
        if (axis == 0) {
          out(offset + r, c) = v(r, c);
        } else {
          out(r, offset + c) = v(r, c);
        }
      }
    }
    offset += axis == 0 ? v.rows() : v.cols();
  }
  auto node = make_node<S>(OpKind::kConcat, std::move(ids), std::move(out));
  node.axis = axis;
  return tape.record(std::move(node));
}

template <typename S>
Var<S> slice(const Var<S>& a, std::size_t axis, std::size_t begin,
             std::size_t end) {
  const Tensor<S>& x = a.value();
  require_rank2("slice", x.shape());
  if (axis > 1 || begin >= end || end > x.shape()[axis]) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") on axis " + std::to_string(axis) +
                     " of " + shape_str(x.shape()));
  }
  Tensor<S> out = axis == 0 ? Tensor<S>::matrix(end - begin, x.cols())
                            : Tensor<S>::matrix(x.rows(), end - begin);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      out(r, c) = axis == 0 ? x(begin + r, c) : x(r, begin + c);
    }
  }
  auto node = make_node<S>(OpKind::kSlice, {a.id()}, std::move(out));
  node.axis = axis;
  node.begin = begin;
  return tape_of(a).record(std::move(node));
}

template <typename S>
Var<S> sum(const Var<S>& a) {
  S total{0};
  for (S v : a.value().data()) total += v;
  return unary(OpKind::kSum, a, Tensor<S>::scalar(total));
}

template <typename S>
Var<S> mean(const Var<S>& a) {
  S total{0};
  for (S v : a.value().data()) total += v;
  return unary(OpKind::kMean, a,
               Tensor<S>::scalar(total / static_cast<S>(a.value().size())));
}

template <typename S>
Var<S> transpose(const Var<S>& a) {
  return unary(OpKind::kTranspose, a, transpose(a.value()));
}

#define PTMA_INSTANTIATE_TAPE(S)                                             \
  template class Tape<S>;                                                    \
  template class Gradients<S>;                                               \
  template Var<S> matmul(const Var<S>&, const Var<S>&);                      \
  template Var<S> add(const Var<S>&, const Var<S>&);                         \
  template Var<S> sub(const Var<S>&, const Var<S>&);                         \
  template Var<S> mul(const Var<S>&, const Var<S>&);                         \
  template Var<S> affine(const Var<S>&, double, double);                     \
  template Var<S> sigmoid(const Var<S>&);                                    \
  template Var<S> tanh(const Var<S>&);                                       \
  template Var<S> relu(const Var<S>&);                                       \
  template Var<S> exp(const Var<S>&);                                        \
  template Var<S> log(const Var<S>&);                                        \
  template Var<S> square(const Var<S>&);                                     \
  template Var<S> masked_softmax(const Var<S>&, const Tensor<S>&);           \
  template Var<S> log_softmax(const Var<S>&);                                \
  template Var<S> concat(std::span<const Var<S>>, std::size_t);              \
  template Var<S> slice(const Var<S>&, std::size_t, std::size_t, std::size_t); \
  template Var<S> sum(const Var<S>&);                                        \
  template Var<S> mean(const Var<S>&);                                       \
  template Var<S> transpose(const Var<S>&);                                  \
  template Tensor<S> matmul(const Tensor<S>&, const Tensor<S>&);             \
  template Tensor<S> transpose(const Tensor<S>&);                            \
  template Tensor<S> softmax_rows(const Tensor<S>&, const Tensor<S>&);

PTMA_INSTANTIATE_TAPE(float)
PTMA_INSTANTIATE_TAPE(double)

#undef PTMA_INSTANTIATE_TAPE

}  // namespace ptma
