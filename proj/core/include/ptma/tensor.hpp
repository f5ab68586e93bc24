// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ptma/error.hpp"

namespace ptma {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);

inline std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto extent : shape) n *= extent;
  return n;
}

/// Dense row-major tensor. The model works with rank-2 tensors only (vectors
/// are 1xN rows, scalars 1x1); higher ranks exist for serialization.
template <typename S>
class Tensor {
 public:
  using value_type = S;

  Tensor() = default;

  explicit Tensor(Shape shape, S fill = S{0})
      : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

  Tensor(Shape shape, std::vector<S> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_numel(shape_) != data_.size()) {
      throw ShapeError("tensor: shape " + shape_str(shape_) + " holds " +
                       std::to_string(shape_numel(shape_)) + " values, got " +
                       std::to_string(data_.size()));
    }
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, S fill = S{0}) {
    return Tensor(Shape{rows, cols}, fill);
  }

  static Tensor scalar(S value) { return Tensor(Shape{1, 1}, value); }

  static Tensor row_vector(std::vector<S> values) {
    const std::size_t n = values.size();
    return Tensor(Shape{1, n}, std::move(values));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  S& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  const S& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols() + c];
  }
  S& operator[](std::size_t i) { return data_[i]; }
  const S& operator[](std::size_t i) const { return data_[i]; }

  std::span<S> data() { return data_; }
  std::span<const S> data() const { return data_; }

  std::span<S> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const S> row(std::size_t r) const {
    return {data_.data() + r * cols(), cols()};
  }

  /// Value of a 1x1 tensor.
  S item() const {
    if (data_.size() != 1) {
      throw ShapeError("tensor: item() on shape " + shape_str(shape_));
    }
    return data_[0];
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.size());
    std::transform(data_.begin(), data_.end(), out.begin(),
                   [](S v) { return static_cast<U>(v); });
    return Tensor<U>(shape_, std::move(out));
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](S v) { return std::isfinite(v); });
  }

  void fill(S value) { std::fill(data_.begin(), data_.end(), value); }

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<S> data_;
};

/// Largest absolute elementwise difference; shapes must match.
template <typename S>
S max_abs_diff(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("max_abs_diff: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  S worst{0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, static_cast<S>(std::abs(a[i] - b[i])));
  }
  return worst;
}

}  // namespace ptma
