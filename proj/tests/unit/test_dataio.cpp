// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

#include "ptma/dataio.hpp"
#include "ptma/error.hpp"
#include "test_support.hpp"

namespace ptma {
namespace {

FeatureSequence sample_sequence(std::size_t K = 5, std::size_t D = 3) {
  FeatureSequence seq;
  seq.num_frames = K;
  seq.feature_dim = D;
  seq.num_classes = 2;
  seq.view_id = 2;
  seq.subject_id = 7;
  seq.fps = 29.97f;
  Xoshiro256pp rng(12);
  for (std::size_t i = 0; i < K * D; ++i) seq.features.push_back(static_cast<float>(rng.normal()));
  for (std::size_t t = 0; t < K; ++t) seq.labels.push_back(static_cast<std::uint16_t>(t % 3));
  return seq;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

TEST(FeatureFile, RoundTripIsBitExact) {
  test::TempDir dir;
  const auto seq = sample_sequence();
  write_feature_file(seq, dir / "a.ptmafeat");
  EXPECT_EQ(std::filesystem::file_size(dir / "a.ptmafeat"), 36u + 5 * 3 * 4 + 5 * 2);
  EXPECT_EQ(read_feature_file(dir / "a.ptmafeat"), seq);
}

TEST(FeatureFile, HeaderLayoutIsLittleEndian) {
  test::TempDir dir;
  write_feature_file(sample_sequence(), dir / "a.ptmafeat");
  std::ifstream in(dir / "a.ptmafeat", std::ios::binary);
  char header[36];
  in.read(header, 36);
  EXPECT_EQ(std::string(header, 8), "PTMAFEAT");
  auto u32_at = [&](int off) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(header[off])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(header[off + 1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(header[off + 2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(header[off + 3])) << 24;
  };
  EXPECT_EQ(u32_at(8), 1u);
  EXPECT_EQ(u32_at(12), 5u);
  EXPECT_EQ(u32_at(16), 3u);
  EXPECT_EQ(u32_at(20), 2u);
  EXPECT_EQ(u32_at(24), 2u);
  EXPECT_EQ(u32_at(28), 7u);
  float fps;
  const std::uint32_t bits = u32_at(32);
  std::memcpy(&fps, &bits, 4);
  EXPECT_EQ(fps, 29.97f);
}

TEST(FeatureFile, TruncationNamesExpectedAndActualSizes) {
  test::TempDir dir;
  const auto path = dir / "t.ptmafeat";
  write_feature_file(sample_sequence(), path);
  const auto full = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, full - 3);
  const std::string msg = message_of([&] { read_feature_file(path); });
  EXPECT_NE(msg.find("expected " + std::to_string(full)), std::string::npos) << msg;
  EXPECT_NE(msg.find("file has " + std::to_string(full - 3)), std::string::npos) << msg;
}

TEST(FeatureFile, RejectsBadMagicVersionAndEmptySequences) {
  test::TempDir dir;
  const auto path = dir / "m.ptmafeat";
  write_feature_file(sample_sequence(), path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("NOTAFEAT", 8);
  }
  EXPECT_NE(message_of([&] { read_feature_file(path); }).find("bad magic"), std::string::npos);

  write_feature_file(sample_sequence(), path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);
    const char v[4] = {9, 0, 0, 0};
    f.write(v, 4);
  }
  EXPECT_NE(message_of([&] { read_feature_file(path); }).find("version 9"), std::string::npos);

  FeatureSequence empty = sample_sequence();
  empty.num_frames = 0;
  empty.features.clear();
  empty.labels.clear();
  EXPECT_THROW(write_feature_file(empty, dir / "e.ptmafeat"), DataError);

  const std::string missing = (dir / "nope.ptmafeat").string();
  EXPECT_NE(message_of([&] { read_feature_file(missing); }).find(missing), std::string::npos);
}

TEST(FeatureSequence, ValidateRejectsOutOfRangeLabels) {
  auto seq = sample_sequence();
  seq.labels[1] = 3;
  EXPECT_THROW(seq.validate(), DataError);
  seq = sample_sequence();
  seq.features.pop_back();
  EXPECT_THROW(seq.validate(), DataError);
}

DatasetCatalog two_view_catalog() {
  DatasetCatalog c;
  c.num_classes = 2;
  c.feature_dim = 3;
  for (std::uint32_t video = 1; video <= 2; ++video) {
    for (std::uint32_t view = 1; view <= 2; ++view) {
      auto seq = sample_sequence(4 + video, 3);
      seq.video_id = video;
      seq.view_id = view;
      seq.subject_id = video;
      c.sequences.push_back(seq);
    }
  }
  return c;
}

TEST(Catalog, ViewsSubjectsAndLookup) {
  const auto c = two_view_catalog();
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.views(), (std::vector<std::uint32_t>{1, 2}));
  EXPECT_EQ(c.subjects(), (std::vector<std::uint32_t>{1, 2}));
  EXPECT_EQ(c.find(2, 1), std::optional<std::size_t>(2));
  EXPECT_FALSE(c.find(3, 1).has_value());
}

TEST(Catalog, RejectsDuplicatesAndMismatchedDimensions) {
  auto c = two_view_catalog();
  c.sequences[1].view_id = 1;
  EXPECT_THROW(c.validate(), DataError);
  c = two_view_catalog();
  c.feature_dim = 4;
  EXPECT_THROW(c.validate(), DataError);
}

TEST(Catalog, SaveLoadRoundTrip) {
  test::TempDir dir;
  const auto c = two_view_catalog();
  const auto manifest = save_catalog(c, dir.path());
  EXPECT_TRUE(std::filesystem::exists(manifest));
  const auto back = load_catalog(manifest);
  EXPECT_EQ(back.num_classes, c.num_classes);
  EXPECT_EQ(back.feature_dim, c.feature_dim);
  ASSERT_EQ(back.sequences.size(), c.sequences.size());
  for (std::size_t i = 0; i < c.sequences.size(); ++i) EXPECT_EQ(back.sequences[i], c.sequences[i]);
}

TEST(Catalog, LoadReportsMissingSequenceFile) {
  test::TempDir dir;
  const auto manifest = save_catalog(two_view_catalog(), dir.path());
  std::filesystem::remove(dir / "video2_view1.ptmafeat");
  const std::string msg = message_of([&] { load_catalog(manifest); });
  EXPECT_NE(msg.find("video2_view1.ptmafeat"), std::string::npos) << msg;
}

}  // namespace
}  // namespace ptma
