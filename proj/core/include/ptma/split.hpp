// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ptma/dataio.hpp"

namespace ptma {

enum class Protocol : std::uint8_t {
  kCrossSubject,      ///< cs: one view, disjoint subjects
  kCrossView,         ///< cv: same subjects, new view
  kCrossSubjectView,  ///< csv: new subjects and new view
  kMultiCrossView,    ///< m-cv: train on (v_i input, v_j target), test on v_k
  kMultiCrossSubjectView,
};

std::string_view protocol_name(Protocol p);
/// Accepts "cs", "cv", "csv", "m-cv", "m-csv".
Protocol parse_protocol(std::string_view name);
inline bool is_multi_view(Protocol p) {
  return p == Protocol::kMultiCrossView || p == Protocol::kMultiCrossSubjectView;
}
inline bool splits_subjects(Protocol p) {
  return p == Protocol::kCrossSubject || p == Protocol::kCrossSubjectView ||
         p == Protocol::kMultiCrossSubjectView;
}

/// A training sequence and, in multi-view protocols, the synchronized
/// sequence of the same recording from the reconstruction view. Both are
/// indices into the catalog.
struct TrainPair {
  std::size_t input = 0;
  std::optional<std::size_t> target;

  bool operator==(const TrainPair&) const = default;
};

struct SplitRequest {
  Protocol protocol = Protocol::kCrossView;
  /// Training view, or (input view, reconstruction view) in m-c(s)v.
  std::vector<std::uint32_t> train_views;
  /// Test view; for cs it must be absent or equal to the training view.
  std::optional<std::uint32_t> test_view;
  std::uint64_t seed = 0;
  /// Fraction of subjects held out for testing in subject-disjoint protocols.
  double test_subject_fraction = 0.3;
  /// Fraction of training subjects held out for validation.
  double val_subject_fraction = 0.2;
};

struct ProtocolSplit {
  Protocol protocol = Protocol::kCrossView;
  std::vector<std::uint32_t> train_views;
  std::uint32_t test_view = 0;
  std::vector<std::uint32_t> train_subjects;
  std::vector<std::uint32_t> val_subjects;
  std::vector<std::uint32_t> test_subjects;
  std::vector<TrainPair> train;
  std::vector<TrainPair> val;
  std::vector<std::size_t> test;

  /// "v1-v2" style label; multi-view protocols read "v12-v3".
  std::string tag() const;
};

/// Throws DataError when a requested view is absent from the catalog, the
/// protocol needs views that coincide, there are too few subjects to split,
/// or a multi-view partner sequence is missing.
ProtocolSplit make_protocol_split(const DatasetCatalog& catalog,
                                  const SplitRequest& request);

}  // namespace ptma
