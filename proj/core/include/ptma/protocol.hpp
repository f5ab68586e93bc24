// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ptma/dataio.hpp"
#include "ptma/metrics.hpp"
#include "ptma/model.hpp"
#include "ptma/split.hpp"

namespace ptma {

struct ProtocolOptions {
  Metric metric = Metric::kMap;
  /// Directory for report.json, frames.csv and latents/; nothing is written
  /// when empty.
  std::filesystem::path out_dir;
  bool dump_latents = false;
  std::size_t threads = 1;
  /// Recorded in the report; computed by the caller from the checkpoint file.
  std::string checkpoint_digest;
};

struct ProtocolResult {
  MetricReport report;
  DetectionRun run;
  std::string tag;
};

/// Canonical one-line JSON of a model config (digest input).
std::string model_config_json(const ModelConfig& config);

/// Scores every test video of `split` with batch inference, evaluates the
/// run and writes the artifacts selected in `options`.
ProtocolResult run_protocol(const DatasetCatalog& catalog, const ProtocolSplit& split,
                            const ModelParams<float>& params, const ModelConfig& config,
                            const ProtocolOptions& options);

/// Scores in [0, 1] laid out like a results table: one row per model, one
/// column per "vX-vY" cell plus the average of the row.
struct ProtocolTable {
  std::string title;
  std::vector<std::string> columns;
  struct Row {
    std::string name;
    std::vector<std::optional<double>> cells;
    double average() const;
  };
  std::vector<Row> rows;

  void set(const std::string& row, const std::string& column, double value);
  /// Markdown with percentages to two decimals and a trailing "Avg." column.
  std::string markdown() const;
};

}  // namespace ptma
