// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "ptma/dataio.hpp"
#include "ptma/metrics.hpp"
#include "ptma/model.hpp"
#include "ptma/objectives.hpp"
#include "ptma/split.hpp"

namespace ptma {

enum class ReconPolicy : std::uint8_t {
  kSelf,        ///< reconstruct the input view
  kPairedView,  ///< reconstruct the synchronized partner view of the pair
};

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  double lr0 = 1.4e-4;
  double lr_min = 0.0;
  LossWeights weights;
  std::uint64_t seed = 0;
  std::size_t patience = 3;
  ReconPolicy recon_policy = ReconPolicy::kSelf;
  /// Windows on a fixed stride grid instead of random starts.
  bool fixed_stride = false;
  /// Divide the classification loss by the number of valid frames.
  bool normalize_cls = false;
  /// Cut paired sequences of unequal length to the shorter one.
  bool truncate_pairs = false;
  std::size_t threads = 1;
  Metric val_metric = Metric::kMap;

  /// Throws ConfigError on epochs/batch/threads = 0, lr0 <= 0 or lr_min
  /// outside [0, lr0].
  void validate() const;
};

/// One training window: rows [start, start + T) of a sequence, or for
/// sequences shorter than T the whole sequence left-padded to T rows.
struct WindowSpec {
  std::size_t start = 0;
  std::vector<std::uint8_t> valid;  ///< T flags; padded rows are 0

  bool operator==(const WindowSpec&) const = default;
};

/// ceil(K / T) windows. K <= T gives one padded window; otherwise starts are
/// uniform in [0, K - T] (or the grid 0, T, 2T, ... clamped to K - T).
std::vector<WindowSpec> sample_windows(std::size_t num_frames, std::size_t window,
                                       Xoshiro256pp& rng, bool fixed_stride = false);

inline std::size_t windows_per_sequence(std::size_t num_frames, std::size_t window) {
  return (num_frames + window - 1) / window;
}

/// Assembles the input, reconstruction target, labels and flags of a window.
/// `target` may be null (reconstruct the input); `frames` limits both
/// sequences to their first `frames` rows.
template <typename S>
WindowData<S> make_window(const FeatureSequence& input, const FeatureSequence* target,
                          const WindowSpec& spec, std::size_t window, std::size_t frames);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename S>
struct AdamState {
  std::vector<Tensor<S>> m;
  std::vector<Tensor<S>> v;
  std::size_t step = 0;

  static AdamState zeros_like(std::span<const Tensor<S>> params);
};

/// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) with bias-corrected
/// moments.
template <typename S>
void adam_step(std::span<Tensor<S>> params, std::span<const Tensor<S>> grads,
               AdamState<S>& state, double lr, const AdamOptions& options = {});

/// lr_min + (lr0 - lr_min) * (1 + cos(pi * step / total)) / 2
double cosine_lr(std::size_t step, std::size_t total_steps, double lr0, double lr_min = 0.0);

struct StepRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double lr = 0.0;
  LossBreakdown loss;  ///< batch means
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t steps = 0;
  LossBreakdown loss;  ///< window-weighted means over the epoch
  double val_score = 0.0;
  /// Metric used for val_score: map/mcap, or accuracy when the validation
  /// videos contain no action frames.
  std::string val_measure;
  bool best = false;
};

struct TrainLog {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  std::size_t planned_steps = 0;
  std::size_t windows_per_epoch = 0;
  std::size_t best_epoch = 0;
  double best_val_score = 0.0;
};

/// step,epoch,lr,L_cls,L_rec,L_kld,total
void write_step_csv(const TrainLog& log, const std::filesystem::path& path);
/// epoch,steps,L_cls,L_rec,L_kld,total,val_score,val_measure,best
void write_epoch_csv(const TrainLog& log, const std::filesystem::path& path);

struct TrainResult {
  ModelParams<float> params;  ///< parameters of the best epoch
  TrainLog log;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Runs the training loop. Validation uses `val` (or `train` when `val` is
/// empty) through batch inference after every epoch; the parameters of the
/// epoch with the strictly highest validation score are returned and
/// training stops after `patience` epochs without improvement.
TrainResult train_run(const DatasetCatalog& catalog, std::span<const TrainPair> train,
                      std::span<const TrainPair> val, const ModelConfig& model_config,
                      const TrainConfig& train_config, const EpochCallback& on_epoch = {});

/// Scores each sequence through batch inference.
DetectionRun detect(const DatasetCatalog& catalog, std::span<const std::size_t> sequences,
                    const ModelParams<float>& params, const ModelConfig& config,
                    std::size_t threads = 1);

}  // namespace ptma
