// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ptma/tensor.hpp"

namespace ptma {

/// One video seen from one camera: per-frame features and labels.
struct FeatureSequence {
  std::size_t num_frames = 0;   ///< K
  std::size_t feature_dim = 0;  ///< D
  std::size_t num_classes = 0;  ///< C (labels 0..C, 0 = background)
  std::vector<float> features;  ///< K x D row-major
  std::vector<std::uint16_t> labels;
  std::uint32_t view_id = 0;
  std::uint32_t subject_id = 0;
  std::uint32_t video_id = 0;  ///< shared by all views of one recording
  float fps = 0.0f;

  std::span<const float> frame(std::size_t t) const {
    return {features.data() + t * feature_dim, feature_dim};
  }

  /// Rows [begin, end) as a matrix.
  template <typename S>
  Tensor<S> rows(std::size_t begin, std::size_t end) const {
    Tensor<S> out = Tensor<S>::matrix(end - begin, feature_dim);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = static_cast<S>(features[begin * feature_dim + i]);
    }
    return out;
  }
  template <typename S>
  Tensor<S> matrix() const {
    return rows<S>(0, num_frames);
  }

  /// Throws DataError on size mismatches, K = 0, D = 0 or labels > C.
  void validate() const;

  bool operator==(const FeatureSequence&) const = default;
};

/// Binary PTMAFEAT file, all little-endian:
///   "PTMAFEAT", u32 version (1), u32 K, u32 D, u32 C, u32 view_id,
///   u32 subject_id, f32 fps, K*D f32 features, K u16 labels.
/// The video id is not stored; catalogs carry it.
void write_feature_file(const FeatureSequence& seq, const std::filesystem::path& path);
FeatureSequence read_feature_file(const std::filesystem::path& path);

inline constexpr std::uint32_t kFeatureFileVersion = 1;

struct DatasetCatalog {
  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;
  std::vector<FeatureSequence> sequences;

  std::vector<std::uint32_t> views() const;
  std::vector<std::uint32_t> subjects() const;
  std::optional<std::size_t> find(std::uint32_t video_id, std::uint32_t view_id) const;

  /// Unique (video, view) pairs; every sequence shares D and C.
  void validate() const;
};

/// Writes one feature file per sequence plus `catalog.json` into `dir`;
/// returns the manifest path.
std::filesystem::path save_catalog(const DatasetCatalog& catalog,
                                   const std::filesystem::path& dir);
/// Loads a manifest written by save_catalog (paths relative to it).
DatasetCatalog load_catalog(const std::filesystem::path& manifest);

}  // namespace ptma
