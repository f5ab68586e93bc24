// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include <gtest/gtest.h>

#include <fstream>

#include <json.hpp>

#include "ptma/checkpoint.hpp"
#include "ptma/protocol.hpp"
#include "ptma/synth.hpp"
#include "test_support.hpp"

namespace ptma {
namespace {

DatasetCatalog three_views() {
  SynthSpec s;
  s.n_subjects = 3;
  s.n_views = 3;
  s.videos_per_subject = 1;
  s.num_frames = 30;
  s.feature_dim = 8;
  s.latent_dim = 4;
  s.num_classes = 3;
  s.seg_min = 3;
  s.seg_max = 6;
  s.seed = 4;
  return synth_generate(s);
}

ModelConfig model(Mode mode) {
  ModelConfig c;
  c.feature_dim = 8;
  c.embed_dim = 6;
  c.latent_dim = 3;
  c.num_classes = 3;
  c.window = 5;
  c.enc_hidden = 6;
  c.dec_hidden = 6;
  c.mode = mode;
  return c;
}

nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

TEST(RunProtocol, PerfectOracleScoresOne) {
  const auto c = three_views();
  const auto split = make_protocol_split(c, {Protocol::kCrossView, {1}, 2, 0});
  DetectionRun run;
  run.num_classes = c.num_classes;
  for (auto i : split.test) {
    const auto& seq = c.sequences[i];
    Tensor<double> s = Tensor<double>::matrix(seq.num_frames, c.num_classes + 1);
    for (std::size_t t = 0; t < seq.num_frames; ++t) s(t, seq.labels[t]) = 1.0;
    run.scores.push_back(s);
    run.labels.push_back(seq.labels);
  }
  EXPECT_DOUBLE_EQ(evaluate_run(run, Metric::kMap).mean, 1.0);
  EXPECT_DOUBLE_EQ(evaluate_run(run, Metric::kMcap).mean, 1.0);
}

TEST(RunProtocol, BaselineAndFullSeeTheSameFrames) {
  const auto c = three_views();
  const auto split = make_protocol_split(c, {Protocol::kCrossView, {1}, 2, 0});
  const auto base_cfg = model(Mode::kBaselineGru), full_cfg = model(Mode::kFull);
  const auto base = run_protocol(c, split, ModelParams<float>::initialize(base_cfg, 1), base_cfg, {});
  const auto full = run_protocol(c, split, ModelParams<float>::initialize(full_cfg, 1), full_cfg, {});
  EXPECT_EQ(base.report.frames, full.report.frames);
  EXPECT_EQ(base.report.frames, split.test.size() * 30);
  EXPECT_EQ(base.tag, "v1-v2");
  EXPECT_NO_THROW(full.run.validate());
}

TEST(RunProtocol, WritesReportFramesAndLatents) {
  test::TempDir dir;
  const auto c = three_views();
  const auto split = make_protocol_split(c, {Protocol::kCrossSubjectView, {1}, 3, 0});
  const auto cfg = model(Mode::kFull);
  ProtocolOptions opts;
  opts.metric = Metric::kMcap;
  opts.out_dir = dir.path();
  opts.dump_latents = true;
  opts.checkpoint_digest = "0123456789abcdef";
  const auto result = run_protocol(c, split, ModelParams<float>::initialize(cfg, 2), cfg, opts);

  const auto j = read_json(dir / "report.json");
  EXPECT_EQ(j["protocol"], "csv");
  EXPECT_EQ(j["tag"], "v1-v3");
  EXPECT_EQ(j["metric"], "mcap");
  EXPECT_EQ(j["background_excluded"], true);
  EXPECT_EQ(j["tie_rule"], std::string(kTieRule));
  EXPECT_EQ(j["frames"], result.report.frames);
  EXPECT_DOUBLE_EQ(j["mean"].get<double>(), result.report.mean);
  EXPECT_EQ(j["per_class"].size(), 3u);
  EXPECT_TRUE(j["per_class"][0].contains("w"));
  EXPECT_EQ(j["config_digest"], digest_hex(model_config_json(cfg)));
  EXPECT_EQ(j["checkpoint_digest"], "0123456789abcdef");
  EXPECT_EQ(j["test_subjects"].get<std::vector<std::uint32_t>>(), split.test_subjects);

  std::ifstream frames(dir / "frames.csv");
  std::string header;
  std::getline(frames, header);
  EXPECT_EQ(header, "video_id,view_id,frame_index,label,argmax_label,score_0,score_1,score_2,score_3");
  std::size_t rows = 0;
  for (std::string line; std::getline(frames, line);) ++rows;
  EXPECT_EQ(rows, result.report.frames);

  for (auto i : split.test) {
    const auto& seq = c.sequences[i];
    const auto dump = read_feature_file(dir / "latents" /
                                        ("video" + std::to_string(seq.video_id) + "_view3.ptmafeat"));
    EXPECT_EQ(dump.feature_dim, cfg.latent_dim);
    EXPECT_EQ(dump.num_frames, seq.num_frames);
    EXPECT_EQ(dump.labels, seq.labels);
  }
}

TEST(RunProtocol, BaselineHasNoLatentsToDump) {
  test::TempDir dir;
  const auto c = three_views();
  const auto split = make_protocol_split(c, {Protocol::kCrossView, {1}, 2, 0});
  const auto cfg = model(Mode::kBaselineGru);
  ProtocolOptions opts;
  opts.out_dir = dir.path();
  opts.dump_latents = true;
  EXPECT_THROW(run_protocol(c, split, ModelParams<float>::initialize(cfg, 2), cfg, opts),
               ConfigError);
}

TEST(RunProtocol, ThreadsDoNotChangeTheReport) {
  const auto c = three_views();
  const auto split = make_protocol_split(c, {Protocol::kCrossView, {2}, 1, 0});
  const auto cfg = model(Mode::kFull);
  const auto params = ModelParams<float>::initialize(cfg, 3);
  ProtocolOptions one, many;
  many.threads = 3;
  const auto a = run_protocol(c, split, params, cfg, one);
  const auto b = run_protocol(c, split, params, cfg, many);
  EXPECT_EQ(a.report.mean, b.report.mean);
  EXPECT_EQ(a.run.scores, b.run.scores);
}

TEST(RunProtocol, RejectsMismatchedModel) {
  const auto c = three_views();
  const auto split = make_protocol_split(c, {Protocol::kCrossView, {1}, 2, 0});
  auto cfg = model(Mode::kFull);
  cfg.feature_dim = 9;
  EXPECT_THROW(run_protocol(c, split, ModelParams<float>::initialize(cfg, 1), cfg, {}), DataError);
}

TEST(ProtocolTable, ThreeViewLayoutWithAverage) {
  ProtocolTable table;
  table.title = "cv";
  for (std::uint32_t i = 1; i <= 3; ++i) {
    for (std::uint32_t j = 1; j <= 3; ++j) {
      if (i == j) continue;
      const std::string col = "v" + std::to_string(i) + "-v" + std::to_string(j);
      table.set("baseline-gru", col, 0.5 + 0.01 * (i + j));
      table.set("full", col, 0.6);
    }
  }
  ASSERT_EQ(table.columns.size(), 6u);
  EXPECT_EQ(table.columns.front(), "v1-v2");
  EXPECT_NEAR(table.rows[1].average(), 0.6, 1e-15);
  EXPECT_NEAR(table.rows[0].average(), 0.54, 1e-15);
  const auto md = table.markdown();
  EXPECT_NE(md.find("| Model | v1-v2 | v1-v3 | v2-v1 | v2-v3 | v3-v1 | v3-v2 | Avg. |"),
            std::string::npos)
      << md;
  EXPECT_NE(md.find("| full | 60.00 | 60.00 | 60.00 | 60.00 | 60.00 | 60.00 | 60.00 |"),
            std::string::npos)
      << md;
}

TEST(ProtocolTable, MissingCellsAreDashedAndSkipped) {
  ProtocolTable table;
  table.set("a", "v1-v2", 0.4);
  table.set("b", "v1-v3", 0.8);
  EXPECT_DOUBLE_EQ(table.rows[0].average(), 0.4);
  EXPECT_NE(table.markdown().find("| a | 40.00 | - | 40.00 |"), std::string::npos);
}

}  // namespace
}  // namespace ptma
