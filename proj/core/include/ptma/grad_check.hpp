// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ptma/tape.hpp"

namespace ptma {

/// Builds a scalar loss on `tape` from leaves holding the parameters (one Var
/// per parameter tensor, same order as passed to grad_check). Must be a pure
/// function of the parameter values.
using ScalarGraph =
    std::function<Var<double>(Tape<double>& tape, std::span<const Var<double>> params)>;

struct GradCheckOptions {
  double eps = 1e-5;
  double tol = 1e-4;
  /// Absolute floor of the relative-error denominator.
  double floor = 1e-8;
};

struct GradCheckEntry {
  std::string name;
  Shape shape;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  /// Some perturbed evaluation produced a non-finite loss.
  bool non_finite = false;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double loss = 0.0;
  bool passed = true;

  double worst_rel_error() const;
};

/// Compares reverse-mode gradients against central differences
/// (f(p + eps) - f(p - eps)) / 2eps, element by element. The relative error of
/// an element is |analytic - numeric| / max(|analytic|, |numeric|, floor).
GradCheckReport grad_check(const ScalarGraph& f,
                           std::span<const Tensor<double>> params,
                           std::span<const std::string> names,
                           const GradCheckOptions& options = {});

}  // namespace ptma
