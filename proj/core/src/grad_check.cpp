// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include "ptma/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace ptma {

namespace {

// Loss at the given parameter values; nullopt when it is not finite.
std::optional<double> evaluate(const ScalarGraph& f,
                               std::span<const Tensor<double>> params) {
  Tape<double> tape;
  tape.set_check_finite(false);
  std::vector<Var<double>> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.leaf(p, false));
  try {
    const double loss = f(tape, vars).value().item();
    if (!std::isfinite(loss)) return std::nullopt;
    return loss;
  } catch (const NumericError&) {
    return std::nullopt;
  }
}

}  // namespace

double GradCheckReport::worst_rel_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.max_rel_error);
  return worst;
}

GradCheckReport grad_check(const ScalarGraph& f,
                           std::span<const Tensor<double>> params,
                           std::span<const std::string> names,
                           const GradCheckOptions& options) {
  if (names.size() != params.size()) {
    throw std::invalid_argument("grad_check: one name per parameter required");
  }
  GradCheckReport report;

  Tape<double> tape;
  tape.set_check_finite(false);
  std::vector<Var<double>> vars;
  for (const auto& p : params) vars.push_back(tape.leaf(p, true));
  const Var<double> loss = f(tape, vars);
  report.loss = loss.value().item();
  if (!std::isfinite(report.loss)) {
    throw NumericError("grad_check: loss is not finite at the base point");
  }
  const Gradients<double> grads = tape.backward(loss);

  std::vector<Tensor<double>> work(params.begin(), params.end());
  for (std::size_t k = 0; k < params.size(); ++k) {
    GradCheckEntry entry;
    entry.name = names[k];
    entry.shape = params[k].shape();
    const Tensor<double>& analytic = grads.at(vars[k]);
    for (std::size_t i = 0; i < params[k].size(); ++i) {
      const double original = work[k][i];
      work[k][i] = original + options.eps;
      const auto plus = evaluate(f, work);
      work[k][i] = original - options.eps;
      const auto minus = evaluate(f, work);
      work[k][i] = original;
      if (!plus || !minus) {
        entry.non_finite = true;
        continue;
      }
      const double numeric = (*plus - *minus) / (2.0 * options.eps);
      const double abs_err = std::abs(analytic[i] - numeric);
      const double denom =
          std::max({std::abs(analytic[i]), std::abs(numeric), options.floor});
      entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
      entry.max_rel_error = std::max(entry.max_rel_error, abs_err / denom);
    }
    entry.passed = !entry.non_finite && entry.max_rel_error < options.tol;
    report.passed = report.passed && entry.passed;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace ptma
