// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <map>

#include "ptma/error.hpp"
#include "ptma/synth.hpp"

namespace ptma {
namespace {

using MatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

MatrixXd features_of(const FeatureSequence& seq) {
  MatrixXd m(seq.num_frames, seq.feature_dim);
  for (std::size_t i = 0; i < seq.features.size(); ++i) m.data()[i] = seq.features[i];
  return m;
}

SynthSpec small_spec() {
  SynthSpec s;
  s.n_subjects = 3;
  s.n_views = 2;
  s.num_frames = 60;
  s.seed = 5;
  return s;
}

TEST(Synth, SameSeedSameCatalog) {
  const auto a = synth_generate(small_spec());
  const auto b = synth_generate(small_spec());
  ASSERT_EQ(a.sequences.size(), b.sequences.size());
  for (std::size_t i = 0; i < a.sequences.size(); ++i) EXPECT_EQ(a.sequences[i], b.sequences[i]);
  auto other = small_spec();
  other.seed = 6;
  EXPECT_NE(synth_generate(other).sequences[0].features, a.sequences[0].features);
}

TEST(Synth, CatalogShapeAndNumbering) {
  const auto spec = small_spec();
  const auto c = synth_generate(spec);
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.sequences.size(), spec.n_subjects * spec.videos_per_subject * spec.n_views);
  EXPECT_EQ(c.views(), (std::vector<std::uint32_t>{1, 2}));
  EXPECT_EQ(c.subjects(), (std::vector<std::uint32_t>{1, 2, 3}));
  EXPECT_EQ(c.feature_dim, spec.feature_dim);
}

TEST(Synth, ViewsAreFrameSynchronized) {
  const auto c = synth_generate(small_spec());
  for (const auto& seq : c.sequences) {
    const auto other = c.find(seq.video_id, seq.view_id == 1 ? 2 : 1);
    ASSERT_TRUE(other.has_value());
    const auto& peer = c.sequences[*other];
    EXPECT_EQ(peer.num_frames, seq.num_frames);
    EXPECT_EQ(peer.labels, seq.labels);
    EXPECT_EQ(peer.subject_id, seq.subject_id);
    EXPECT_NE(peer.features, seq.features);
  }
}

TEST(Synth, NoiselessViewsAreRelatedByTheLinearMap) {
  auto spec = small_spec();
  spec.noise = 0.0;
  const auto c = synth_generate(spec);
  const auto mats = synth_view_matrices(spec);
  ASSERT_EQ(mats.size(), 2u);
  const Eigen::Map<const MatrixXd> R1(mats[0].data(), spec.feature_dim, spec.latent_dim);
  const Eigen::Map<const MatrixXd> R2(mats[1].data(), spec.feature_dim, spec.latent_dim);
  // Orthonormal columns.
  EXPECT_LT((R1.transpose() * R1 - MatrixXd::Identity(spec.latent_dim, spec.latent_dim))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
  const MatrixXd pinv = MatrixXd(R1).completeOrthogonalDecomposition().pseudoInverse();
  const MatrixXd map = R2 * pinv;  // D x D
  for (const auto& seq : c.sequences) {
    if (seq.view_id != 1) continue;
    const auto& peer = c.sequences[*c.find(seq.video_id, 2)];
    const MatrixXd x1 = features_of(seq), x2 = features_of(peer);
    const MatrixXd predicted = x1 * map.transpose();
    const double scale = x2.cwiseAbs().maxCoeff();
    EXPECT_LT((predicted - x2).cwiseAbs().maxCoeff(), 1e-5 * scale);
  }
}

TEST(Synth, LabelTrackMatchesSegmentDistribution) {
  SynthSpec spec;
  spec.n_subjects = 100;
  spec.videos_per_subject = 1;
  spec.n_views = 1;
  spec.feature_dim = 8;
  spec.latent_dim = 4;
  spec.seed = 17;
  const auto c = synth_generate(spec);
  ASSERT_EQ(c.sequences.size(), 100u);

  std::map<std::size_t, std::size_t> lengths;
  std::vector<std::size_t> class_frames(spec.num_classes + 1, 0);
  std::size_t segments = 0, frames = 0;
  for (const auto& seq : c.sequences) {
    std::size_t run = 1;
    for (std::size_t t = 0; t < seq.num_frames; ++t) {
      ++class_frames[seq.labels[t]];
      ++frames;
      const bool last = t + 1 == seq.num_frames;
      if (!last && seq.labels[t + 1] == seq.labels[t]) {
        ++run;
        continue;
      }
      if (!last) {  // the final segment is cut by the video end
        ++lengths[run];
        ++segments;
      }
      run = 1;
    }
  }
  // Segment lengths: uniform on [seg_min, seg_max]. Adjacent action
  // segments with the same class cannot occur since actions alternate with
  // background, so every label change closes one segment.
  const double expected_p = 1.0 / static_cast<double>(spec.seg_max - spec.seg_min + 1);
  double mean = 0.0;
  for (std::size_t len = spec.seg_min; len <= spec.seg_max; ++len) {
    const double p = static_cast<double>(lengths[len]) / static_cast<double>(segments);
    EXPECT_NEAR(p, expected_p, 0.05) << "length " << len;
    mean += static_cast<double>(len) * p;
  }
  EXPECT_EQ(lengths.begin()->first >= spec.seg_min, true);
  EXPECT_LE(lengths.rbegin()->first, spec.seg_max);
  EXPECT_NEAR(mean, 0.5 * static_cast<double>(spec.seg_min + spec.seg_max), 0.05 * 20.0);

  // Background and action alternate, so half of the frames are background;
  // action frames split evenly over the classes.
  const double bg = static_cast<double>(class_frames[0]) / static_cast<double>(frames);
  EXPECT_NEAR(bg, 0.5, 0.05);
  for (std::size_t k = 1; k <= spec.num_classes; ++k) {
    const double share = static_cast<double>(class_frames[k]) / static_cast<double>(frames);
    EXPECT_NEAR(share, 0.5 / static_cast<double>(spec.num_classes), 0.05);
  }
}

TEST(Synth, ValidateRejectsBadSpecs) {
  auto s = small_spec();
  s.feature_dim = 4;
  s.latent_dim = 8;
  EXPECT_THROW(synth_generate(s), ConfigError);
  s = small_spec();
  s.seg_min = 40;
  s.seg_max = 10;
  EXPECT_THROW(synth_generate(s), ConfigError);
  s = small_spec();
  s.noise = -0.1;
  EXPECT_THROW(synth_generate(s), ConfigError);
  s = small_spec();
  s.n_views = 0;
  EXPECT_THROW(synth_generate(s), ConfigError);
}

}  // namespace
}  // namespace ptma
