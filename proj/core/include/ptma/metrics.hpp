// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptma/tensor.hpp"

namespace ptma {

struct APResult {
  double ap = 0.0;
  /// negatives / positives over the scored frames.
  double w = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  /// False when there are no positives; `ap` is then 0 and meaningless.
  bool present = false;
};

/// Ranks frames by descending score, breaking ties by ascending index, and
/// averages the precision at every true positive. With `calibrated` the
/// precision is w*TP / (w*TP + FP).
APResult average_precision(std::span<const double> scores,
                           std::span<const std::uint8_t> positives, bool calibrated);

/// Per-frame class scores of every test video plus ground truth.
struct DetectionRun {
  std::string protocol;
  std::size_t num_classes = 0;
  std::vector<Tensor<double>> scores;  ///< per video, K x (C+1)
  std::vector<std::vector<std::uint16_t>> labels;

  /// Rows must be finite, non-negative and sum to 1 within 1e-5.
  void validate() const;
};

enum class Metric : std::uint8_t { kMap, kMcap };

std::string_view metric_name(Metric m);
/// Accepts "map" and "mcap".
Metric parse_metric(std::string_view name);

inline constexpr std::string_view kTieRule =
    "descending score, ties by ascending pooled frame index (videos in run order)";

struct MetricReport {
  Metric metric = Metric::kMap;
  /// Index c-1 holds action class c; background is excluded.
  std::vector<APResult> per_class;
  /// Mean over classes with at least one positive frame.
  double mean = 0.0;
  std::size_t classes_present = 0;
  std::size_t frames = 0;
};

/// Pools frames over all videos per action class and averages AP (mAP) or
/// calibrated AP (mcAP) over the present classes.
MetricReport evaluate_run(const DetectionRun& run, Metric metric);

/// Fraction of frames whose argmax score equals the label.
double frame_accuracy(const DetectionRun& run);

}  // namespace ptma
