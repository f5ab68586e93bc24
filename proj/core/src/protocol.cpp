// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include "ptma/protocol.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "ptma/checkpoint.hpp"
#include "ptma/stream.hpp"
#include "parallel.hpp"

namespace ptma {

using nlohmann::ordered_json;

std::string model_config_json(const ModelConfig& c) {
  ordered_json j;
  j["feature_dim"] = c.feature_dim;
  j["embed_dim"] = c.embed_dim;
  j["latent_dim"] = c.latent_dim;
  j["num_classes"] = c.num_classes;
  j["window"] = c.window;
  j["alpha"] = c.temperature();
  j["enc_hidden"] = c.enc_hidden;
  j["dec_hidden"] = c.dec_hidden;
  j["mode"] = mode_name(c.mode);
  return j.dump();
}

namespace {

void write_report(const std::filesystem::path& path, const ProtocolSplit& split,
                  const ModelConfig& config, const ProtocolOptions& options,
                  const MetricReport& report, std::size_t videos) {
  ordered_json j;
  j["protocol"] = protocol_name(split.protocol);
  j["tag"] = split.tag();
  j["train_views"] = split.train_views;
  j["test_view"] = split.test_view;
  j["train_subjects"] = split.train_subjects;
  j["test_subjects"] = split.test_subjects;
  j["metric"] = metric_name(report.metric);
  j["background_excluded"] = true;
  j["tie_rule"] = kTieRule;
  j["videos"] = videos;
  j["frames"] = report.frames;
  j["classes_present"] = report.classes_present;
  j["mean"] = report.mean;
  auto& classes = j["per_class"] = ordered_json::array();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& ap = report.per_class[c];
    ordered_json entry;
    entry["class"] = c + 1;
    entry["present"] = ap.present;
    entry["ap"] = ap.present ? ordered_json(ap.ap) : ordered_json(nullptr);
    entry["w"] = ap.w;
    entry["positives"] = ap.positives;
    entry["negatives"] = ap.negatives;
    classes.push_back(std::move(entry));
  }
  j["config_digest"] = digest_hex(model_config_json(config));
  j["checkpoint_digest"] = options.checkpoint_digest;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_frames_csv(const std::filesystem::path& path, const DatasetCatalog& catalog,
                      const std::vector<std::size_t>& test, const DetectionRun& run) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(9);
  out << "video_id,view_id,frame_index,label,argmax_label";
  for (std::size_t c = 0; c <= run.num_classes; ++c) out << ",score_" << c;
  out << '\n';
  for (std::size_t v = 0; v < test.size(); ++v) {
    const auto& seq = catalog.sequences[test[v]];
    const auto& s = run.scores[v];
    for (std::size_t r = 0; r < s.rows(); ++r) {
      const auto row = s.row(r);
      const auto arg = std::max_element(row.begin(), row.end()) - row.begin();
      out << seq.video_id << ',' << seq.view_id << ',' << r << ',' << run.labels[v][r] << ','
          << arg;
      for (double p : row) out << ',' << p;
      out << '\n';
    }
  }
}

}  // namespace

ProtocolResult run_protocol(const DatasetCatalog& catalog, const ProtocolSplit& split,
                            const ModelParams<float>& params, const ModelConfig& config,
                            const ProtocolOptions& options) {
  config.validate();
  params.check_shapes(config);
  if (catalog.num_classes != config.num_classes || catalog.feature_dim != config.feature_dim) {
    throw DataError("protocol: catalog has D=" + std::to_string(catalog.feature_dim) +
                    ", C=" + std::to_string(catalog.num_classes) + ", model expects D=" +
                    std::to_string(config.feature_dim) + ", C=" +
                    std::to_string(config.num_classes));
  }
  ProtocolResult result;
  result.tag = split.tag();
  result.run.protocol = std::string(protocol_name(split.protocol)) + " " + result.tag;
  result.run.num_classes = config.num_classes;
  const std::size_t n = split.test.size();
  result.run.scores.resize(n);
  result.run.labels.resize(n);
  std::vector<Tensor<double>> latents(n);
  detail::parallel_for(n, options.threads, [&](std::size_t i) {
    const auto& seq = catalog.sequences.at(split.test[i]);
    auto out = batch_infer(params, config, seq.matrix<float>());
    result.run.scores[i] = std::move(out.scores);
    result.run.labels[i] = seq.labels;
    latents[i] = std::move(out.mu);
  });
  result.report = evaluate_run(result.run, options.metric);

  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    write_report(options.out_dir / "report.json", split, config, options, result.report, n);
    write_frames_csv(options.out_dir / "frames.csv", catalog, split.test, result.run);
    if (options.dump_latents) {
      if (!uses_latent(config.mode)) {
        throw ConfigError("protocol: mode " + std::string(mode_name(config.mode)) +
                          " has no latent encodings to dump");
      }
      const auto dir = options.out_dir / "latents";
      std::filesystem::create_directories(dir);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& seq = catalog.sequences[split.test[i]];
        FeatureSequence dump;
        dump.num_frames = seq.num_frames;
        dump.feature_dim = config.latent_dim;
        dump.num_classes = seq.num_classes;
        dump.features.assign(latents[i].data().begin(), latents[i].data().end());
        dump.labels = seq.labels;
        dump.view_id = seq.view_id;
        dump.subject_id = seq.subject_id;
        dump.video_id = seq.video_id;
        dump.fps = seq.fps;
        write_feature_file(dump, dir / ("video" + std::to_string(seq.video_id) + "_view" +
                                        std::to_string(seq.view_id) + ".ptmafeat"));
      }
    }
  }
  return result;
}

double ProtocolTable::Row::average() const {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& c : cells) {
    if (c) {
      total += *c;
      ++n;
    }
  }
  return n ? total / static_cast<double>(n) : 0.0;
}

void ProtocolTable::set(const std::string& row, const std::string& column, double value) {
  auto col = std::find(columns.begin(), columns.end(), column);
  if (col == columns.end()) {
    columns.push_back(column);
    for (auto& r : rows) r.cells.emplace_back();
    col = columns.end() - 1;
  }
  auto it = std::find_if(rows.begin(), rows.end(), [&](const Row& r) { return r.name == row; });
  if (it == rows.end()) {
    rows.push_back({row, std::vector<std::optional<double>>(columns.size())});
    it = rows.end() - 1;
  }
  it->cells[static_cast<std::size_t>(col - columns.begin())] = value;
}

std::string ProtocolTable::markdown() const {
  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
    return std::string(buf);
  };
  std::string out;
  if (!title.empty()) out += title + "\n\n";
  out += "| Model |";
  for (const auto& c : columns) out += " " + c + " |";
  out += " Avg. |\n|---|";
  for (std::size_t i = 0; i <= columns.size(); ++i) out += "---:|";
  out += '\n';
  for (const auto& r : rows) {
    out += "| " + r.name + " |";
    for (const auto& c : r.cells) out += " " + (c ? pct(*c) : std::string("-")) + " |";
    out += " " + pct(r.average()) + " |\n";
  }
  return out;
}

}  // namespace ptma
