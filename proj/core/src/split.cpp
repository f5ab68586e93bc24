// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include "ptma/split.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ptma/random.hpp"

namespace ptma {

namespace {

std::size_t held_out_count(std::size_t n, double fraction) {
  if (n < 2) return 0;
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

std::uint64_t subject_hash(std::uint64_t seed, std::uint32_t subject) {
  std::uint64_t state = seed ^ (std::uint64_t{subject} * 0x9E6C63D0676A9A99ULL);
  return splitmix64(state);
}

void require_view(const std::vector<std::uint32_t>& views, std::uint32_t v) {
  if (!std::binary_search(views.begin(), views.end(), v)) {
    std::string have;
    for (auto x : views) have += (have.empty() ? "" : ",") + std::to_string(x);
    throw DataError("split: view " + std::to_string(v) + " not in catalog (views: " +
                    have + ")");
  }
}

}  // namespace

std::string_view protocol_name(Protocol p) {
  switch (p) {
    case Protocol::kCrossSubject: return "cs";
    case Protocol::kCrossView: return "cv";
    case Protocol::kCrossSubjectView: return "csv";
    case Protocol::kMultiCrossView: return "m-cv";
    case Protocol::kMultiCrossSubjectView: return "m-csv";
  }
  return "?";
}

Protocol parse_protocol(std::string_view name) {
  for (Protocol p : {Protocol::kCrossSubject, Protocol::kCrossView,
                     Protocol::kCrossSubjectView, Protocol::kMultiCrossView,
                     Protocol::kMultiCrossSubjectView}) {
    if (protocol_name(p) == name) return p;
  }
  throw ConfigError("unknown protocol '" + std::string(name) +
                    "' (expected cs, cv, csv, m-cv or m-csv)");
}

std::string ProtocolSplit::tag() const {
  std::string out = "v";
  for (auto v : train_views) out += std::to_string(v);
  return out + "-v" + std::to_string(test_view);
}

ProtocolSplit make_protocol_split(const DatasetCatalog& catalog,
                                  const SplitRequest& request) {
  const Protocol proto = request.protocol;
  const auto views = catalog.views();
  const std::size_t needed_train_views = is_multi_view(proto) ? 2 : 1;
  if (request.train_views.size() != needed_train_views) {
    throw ConfigError("split: protocol " + std::string(protocol_name(proto)) + " needs " +
                      std::to_string(needed_train_views) + " training view(s), got " +
                      std::to_string(request.train_views.size()));
  }
  const std::size_t views_needed = proto == Protocol::kCrossSubject ? 1
                                   : is_multi_view(proto)            ? 3
                                                                     : 2;
  if (views.size() < views_needed) {
    throw DataError("split: protocol " + std::string(protocol_name(proto)) + " needs " +
                    std::to_string(views_needed) + " views, catalog has " +
                    std::to_string(views.size()));
  }

  ProtocolSplit split;
  split.protocol = proto;
  split.train_views = request.train_views;
  if (proto == Protocol::kCrossSubject) {
    split.test_view = request.test_view.value_or(request.train_views[0]);
    if (split.test_view != request.train_views[0]) {
      throw ConfigError("split: cs trains and tests on one view");
    }
  } else {
    if (!request.test_view) {
      throw ConfigError("split: protocol " + std::string(protocol_name(proto)) +
                        " needs a test view");
    }
    split.test_view = *request.test_view;
  }
  for (auto v : split.train_views) require_view(views, v);
  require_view(views, split.test_view);

  std::set<std::uint32_t> distinct(split.train_views.begin(), split.train_views.end());
  distinct.insert(split.test_view);
  if (distinct.size() != views_needed) {
    throw DataError("split: protocol " + std::string(protocol_name(proto)) +
                    " needs pairwise different views, got " + split.tag());
  }

  // Subjects: the pool is every subject with a sequence in the training view.
  std::vector<std::uint32_t> subjects = catalog.subjects();
  if (splits_subjects(proto)) {
    if (subjects.size() < 2) {
      throw DataError("split: protocol " + std::string(protocol_name(proto)) +
                      " needs at least 2 subjects, catalog has " +
                      std::to_string(subjects.size()));
    }
    std::vector<std::uint32_t> order = subjects;
    Xoshiro256pp rng = Xoshiro256pp::stream(request.seed, StreamPurpose::kSplit);
    rng.shuffle(std::span<std::uint32_t>(order));
    const std::size_t n_test = held_out_count(order.size(), request.test_subject_fraction);
    split.test_subjects.assign(order.begin(), order.begin() + static_cast<long>(n_test));
    split.train_subjects.assign(order.begin() + static_cast<long>(n_test), order.end());
  } else {
    split.test_subjects = subjects;
    split.train_subjects = subjects;
  }

  // Validation subjects come out of the training subjects, ranked by hash.
  std::vector<std::uint32_t> ranked = split.train_subjects;
  std::sort(ranked.begin(), ranked.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto ha = subject_hash(request.seed, a), hb = subject_hash(request.seed, b);
    return ha != hb ? ha < hb : a < b;
  });
  const std::size_t n_val = held_out_count(ranked.size(), request.val_subject_fraction);
  split.val_subjects.assign(ranked.begin(), ranked.begin() + static_cast<long>(n_val));
  std::sort(split.test_subjects.begin(), split.test_subjects.end());
  std::sort(split.val_subjects.begin(), split.val_subjects.end());
  std::erase_if(split.train_subjects, [&](std::uint32_t s) {
    return std::binary_search(split.val_subjects.begin(), split.val_subjects.end(), s);
  });
  std::sort(split.train_subjects.begin(), split.train_subjects.end());

  auto contains = [](const std::vector<std::uint32_t>& set, std::uint32_t s) {
    return std::binary_search(set.begin(), set.end(), s);
  };
  const std::uint32_t input_view = split.train_views[0];
  for (std::size_t i = 0; i < catalog.sequences.size(); ++i) {
    const auto& seq = catalog.sequences[i];
    if (seq.view_id == split.test_view && contains(split.test_subjects, seq.subject_id)) {
      split.test.push_back(i);
    }
    if (seq.view_id != input_view) continue;
    const bool train = contains(split.train_subjects, seq.subject_id);
    const bool val = contains(split.val_subjects, seq.subject_id);
    if (!train && !val) continue;
    TrainPair pair{i, std::nullopt};
    if (is_multi_view(proto)) {
      pair.target = catalog.find(seq.video_id, split.train_views[1]);
      if (!pair.target) {
        throw DataError("split: video " + std::to_string(seq.video_id) + " has no view " +
                        std::to_string(split.train_views[1]) + " to pair with view " +
                        std::to_string(input_view));
      }
    }
    (train ? split.train : split.val).push_back(pair);
  }
  if (split.train.empty()) throw DataError("split: no training sequences for " + split.tag());
  if (split.test.empty()) throw DataError("split: no test sequences for " + split.tag());
  return split;
}

}  // namespace ptma
