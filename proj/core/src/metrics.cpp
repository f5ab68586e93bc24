// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include "ptma/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ptma {

APResult average_precision(std::span<const double> scores,
                           std::span<const std::uint8_t> positives, bool calibrated) {
  if (scores.size() != positives.size()) {
    throw ShapeError("average_precision: " + std::to_string(scores.size()) +
                     " scores vs " + std::to_string(positives.size()) + " labels");
  }
  if (scores.empty()) throw DataError("average_precision: no frames");

  APResult out;
  out.positives = static_cast<std::size_t>(
      std::count_if(positives.begin(), positives.end(), [](auto p) { return p != 0; }));
  out.negatives = scores.size() - out.positives;
  if (out.positives == 0) return out;
  out.present = true;
  out.w = static_cast<double>(out.negatives) / static_cast<double>(out.positives);

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const double w = calibrated ? out.w : 1.0;
  double tp = 0.0, fp = 0.0, sum = 0.0;
  for (std::size_t idx : order) {
    if (positives[idx]) {
      tp += 1.0;
      sum += w * tp / (w * tp + fp);
    } else {
      fp += 1.0;
    }
  }
  out.ap = sum / static_cast<double>(out.positives);
  return out;
}

void DetectionRun::validate() const {
  if (scores.size() != labels.size()) {
    throw DataError("detection run: " + std::to_string(scores.size()) +
                    " score matrices vs " + std::to_string(labels.size()) + " label tracks");
  }
  for (std::size_t v = 0; v < scores.size(); ++v) {
    const auto& s = scores[v];
    if (s.rows() != labels[v].size() || s.cols() != num_classes + 1) {
      throw DataError("detection run: video " + std::to_string(v) + " scores " +
                      shape_str(s.shape()) + " vs " + std::to_string(labels[v].size()) +
                      " labels and " + std::to_string(num_classes + 1) + " classes");
    }
    for (std::size_t r = 0; r < s.rows(); ++r) {
      double total = 0.0;
      for (double p : s.row(r)) {
        if (!std::isfinite(p) || p < 0.0) {
          throw DataError("detection run: video " + std::to_string(v) + " frame " +
                          std::to_string(r) + " has an invalid score");
        }
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-5) {
        throw DataError("detection run: video " + std::to_string(v) + " frame " +
                        std::to_string(r) + " scores sum to " + std::to_string(total));
      }
    }
  }
}

std::string_view metric_name(Metric m) { return m == Metric::kMap ? "map" : "mcap"; }

Metric parse_metric(std::string_view name) {
  if (name == "map") return Metric::kMap;
  if (name == "mcap") return Metric::kMcap;
  throw ConfigError("unknown metric '" + std::string(name) + "' (expected map or mcap)");
}

MetricReport evaluate_run(const DetectionRun& run, Metric metric) {
  run.validate();
  MetricReport report;
  report.metric = metric;
  for (const auto& l : run.labels) report.frames += l.size();
  if (report.frames == 0) throw DataError("evaluate_run: no frames");

  std::vector<double> scores(report.frames);
  std::vector<std::uint8_t> positives(report.frames);
  double total = 0.0;
  for (std::size_t c = 1; c <= run.num_classes; ++c) {
    std::size_t k = 0;
    for (std::size_t v = 0; v < run.scores.size(); ++v) {
      for (std::size_t r = 0; r < run.labels[v].size(); ++r, ++k) {
        scores[k] = run.scores[v](r, c);
        positives[k] = run.labels[v][r] == c;
      }
    }
    APResult ap = average_precision(scores, positives, metric == Metric::kMcap);
    if (ap.present) {
      total += ap.ap;
      ++report.classes_present;
    }
    report.per_class.push_back(ap);
  }
  report.mean = report.classes_present ? total / static_cast<double>(report.classes_present)
                                       : 0.0;
  return report;
}

double frame_accuracy(const DetectionRun& run) {
  std::size_t hits = 0, frames = 0;
  for (std::size_t v = 0; v < run.scores.size(); ++v) {
    const auto& s = run.scores[v];
    for (std::size_t r = 0; r < s.rows(); ++r, ++frames) {
      const auto row = s.row(r);
      const auto best = static_cast<std::size_t>(
          std::max_element(row.begin(), row.end()) - row.begin());
      hits += best == run.labels[v][r];
    }
  }
  return frames ? static_cast<double>(hits) / static_cast<double>(frames) : 0.0;
}

}  // namespace ptma
