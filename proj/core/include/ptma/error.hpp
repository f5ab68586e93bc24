// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#pragma once

#include <stdexcept>
#include <string>

namespace ptma {

/// Input tensors whose extents do not satisfy an operation's contract.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed, missing or inconsistent data (files, catalogs, splits).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN/Inf produced from finite inputs, divergence, failed gradient checks.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration values or mode/config combinations.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ptma
