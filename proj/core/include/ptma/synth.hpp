// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ptma/dataio.hpp"

namespace ptma {

/// Parameters of the synthetic multi-view generator.
///
/// Every recording has one latent trajectory shared by all views. Labels
/// alternate background and action segments with lengths uniform in
/// [seg_min, seg_max]; the latent at frame t is
///   l_t = m_{y_t} + s_subject + j_t,  j_t = rho j_{t-1} + sqrt(1 - rho^2) jitter n_t
/// and view v renders x_t = R_v l_t + noise n'_t with R_v a D x L matrix.
struct SynthSpec {
  std::size_t n_subjects = 4;
  std::size_t n_views = 3;
  std::size_t videos_per_subject = 2;
  std::size_t num_classes = 4;
  std::size_t latent_dim = 8;
  std::size_t feature_dim = 32;
  std::size_t num_frames = 200;
  std::size_t seg_min = 10;
  std::size_t seg_max = 30;
  /// Norm of each class mean in latent space.
  double class_separation = 3.0;
  double jitter = 0.5;
  double ar_coeff = 0.9;
  double noise = 0.1;
  /// Spread of the per-view matrices around a shared base matrix.
  double view_variation = 0.5;
  double subject_scale = 0.3;
  /// Orthonormalize the columns of each R_v.
  bool orthonormal = true;
  std::uint64_t seed = 0;
  float fps = 30.0f;

  /// Throws ConfigError on zero counts, D < L, seg_min > seg_max or
  /// negative scales.
  void validate() const;
};

/// Per-view rendering matrices R_v (D x L, row-major), in view order.
std::vector<std::vector<double>> synth_view_matrices(const SynthSpec& spec);

/// Builds the catalog. Views and subjects are numbered from 1; all views of
/// a recording share its video_id, frame count and label track.
DatasetCatalog synth_generate(const SynthSpec& spec);

}  // namespace ptma
