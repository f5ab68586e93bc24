// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include "ptma/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <tuple>

#include "parallel.hpp"
#include "ptma/stream.hpp"

namespace ptma {

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train config: epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("train config: batch_size must be >= 1");
  if (threads == 0) throw ConfigError("train config: threads must be >= 1");
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw ConfigError("train config: lr0 must be > 0");
  if (!(lr_min >= 0.0) || lr_min > lr0) {
    throw ConfigError("train config: lr_min must lie in [0, lr0]");
  }
  weights.validate();
}

std::vector<WindowSpec> sample_windows(std::size_t num_frames, std::size_t window,
                                       Xoshiro256pp& rng, bool fixed_stride) {
  if (num_frames == 0 || window == 0) {
    throw ConfigError("sample_windows: sequence length and window must be >= 1");
  }
  std::vector<WindowSpec> out;
  if (num_frames <= window) {
    WindowSpec spec;
    spec.valid.assign(window, 1);
    std::fill_n(spec.valid.begin(), window - num_frames, std::uint8_t{0});
    out.push_back(std::move(spec));
    return out;
  }
  const std::size_t count = windows_per_sequence(num_frames, window);
  const std::size_t last = num_frames - window;
  for (std::size_t k = 0; k < count; ++k) {
    WindowSpec spec;
    spec.start = fixed_stride ? std::min(k * window, last)
                              : static_cast<std::size_t>(rng.uniform_int(0, last));
    spec.valid.assign(window, 1);
    out.push_back(std::move(spec));
  }
  return out;
}

template <typename S>
WindowData<S> make_window(const FeatureSequence& input, const FeatureSequence* target,
                          const WindowSpec& spec, std::size_t window, std::size_t frames) {
  if (spec.valid.size() != window) {
    throw ShapeError("make_window: " + std::to_string(spec.valid.size()) +
                     " flags for window " + std::to_string(window));
  }
  const std::size_t take = std::min(window, frames);
  if (spec.start + take > frames) {
    throw ShapeError("make_window: window at " + std::to_string(spec.start) +
                     " overruns " + std::to_string(frames) + " frames");
  }
  const FeatureSequence& tgt = target ? *target : input;
  WindowData<S> w;
  w.valid = spec.valid;
  std::tie(w.input, std::ignore) = pad_window(input.rows<S>(spec.start, spec.start + take), window);
  std::tie(w.target, std::ignore) = pad_window(tgt.rows<S>(spec.start, spec.start + take), window);
  w.labels.assign(window, 0);
  std::copy_n(input.labels.begin() + static_cast<long>(spec.start), take,
              w.labels.begin() + static_cast<long>(window - take));
  return w;
}

template <typename S>
AdamState<S> AdamState<S>::zeros_like(std::span<const Tensor<S>> params) {
  AdamState<S> state;
  for (const auto& p : params) {
    state.m.emplace_back(p.shape());
    state.v.emplace_back(p.shape());
  }
  return state;
}

template <typename S>
void adam_step(std::span<Tensor<S>> params, std::span<const Tensor<S>> grads,
               AdamState<S>& state, double lr, const AdamOptions& options) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " params, " +
                     std::to_string(grads.size()) + " grads, " +
                     std::to_string(state.m.size()) + " moment slots");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(options.beta1, t);
  const double c2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    const auto& g = grads[i];
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (g.shape() != p.shape() || m.shape() != p.shape()) {
      throw ShapeError("adam_step: slot " + std::to_string(i) + " param " +
                       shape_str(p.shape()) + " grad " + shape_str(g.shape()));
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = g[k];
      const double mk = options.beta1 * m[k] + (1.0 - options.beta1) * gk;
      const double vk = options.beta2 * v[k] + (1.0 - options.beta2) * gk * gk;
      m[k] = static_cast<S>(mk);
      v[k] = static_cast<S>(vk);
      p[k] = static_cast<S>(p[k] - lr * (mk / c1) / (std::sqrt(vk / c2) + options.eps));
    }
  }
}

double cosine_lr(std::size_t step, std::size_t total_steps, double lr0, double lr_min) {
  if (total_steps == 0) return lr0;
  const double progress =
      static_cast<double>(std::min(step, total_steps)) / static_cast<double>(total_steps);
  return lr_min + (lr0 - lr_min) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void write_step_csv(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(9);
  out << "step,epoch,lr,L_cls,L_rec,L_kld,total\n";
  for (const auto& s : log.steps) {
    out << s.step << ',' << s.epoch << ',' << s.lr << ',' << s.loss.cls << ','
        << s.loss.rec << ',' << s.loss.kld << ',' << s.loss.total << '\n';
  }
}

void write_epoch_csv(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(9);
  out << "epoch,steps,L_cls,L_rec,L_kld,total,val_score,val_measure,best\n";
  for (const auto& e : log.epochs) {
    out << e.epoch << ',' << e.steps << ',' << e.loss.cls << ',' << e.loss.rec << ','
        << e.loss.kld << ',' << e.loss.total << ',' << e.val_score << ',' << e.val_measure
        << ',' << (e.best ? 1 : 0) << '\n';
  }
}

DetectionRun detect(const DatasetCatalog& catalog, std::span<const std::size_t> sequences,
                    const ModelParams<float>& params, const ModelConfig& config,
                    std::size_t threads) {
  DetectionRun run;
  run.num_classes = config.num_classes;
  run.scores.resize(sequences.size());
  run.labels.resize(sequences.size());
  detail::parallel_for(sequences.size(), threads, [&](std::size_t i) {
    const auto& seq = catalog.sequences.at(sequences[i]);
    run.scores[i] = batch_infer(params, config, seq.matrix<float>()).scores;
    run.labels[i] = seq.labels;
  });
  return run;
}

namespace {

struct PreparedPair {
  const FeatureSequence* input = nullptr;
  const FeatureSequence* target = nullptr;
  std::size_t frames = 0;
};

std::vector<PreparedPair> prepare_pairs(const DatasetCatalog& catalog,
                                        std::span<const TrainPair> pairs,
                                        const ModelConfig& config, const TrainConfig& tc) {
  const bool paired = tc.recon_policy == ReconPolicy::kPairedView && uses_decoder(config.mode);
  std::vector<PreparedPair> out;
  for (const auto& pair : pairs) {
    PreparedPair p;
    p.input = &catalog.sequences.at(pair.input);
    p.frames = p.input->num_frames;
    if (p.input->feature_dim != config.feature_dim) {
      throw DataError("train: video " + std::to_string(p.input->video_id) + " has D=" +
                      std::to_string(p.input->feature_dim) + ", model expects " +
                      std::to_string(config.feature_dim));
    }
    if (paired) {
      if (!pair.target) {
        throw DataError("train: paired-view reconstruction needs a partner for video " +
                        std::to_string(p.input->video_id));
      }
      p.target = &catalog.sequences.at(*pair.target);
      if (p.target->num_frames != p.input->num_frames) {
        if (!tc.truncate_pairs) {
          throw DataError("train: video " + std::to_string(p.input->video_id) + " view " +
                          std::to_string(p.input->view_id) + " has " +
                          std::to_string(p.input->num_frames) + " frames but view " +
                          std::to_string(p.target->view_id) + " has " +
                          std::to_string(p.target->num_frames) +
                          " (use truncate-pairs to cut to the shorter)");
        }
        p.frames = std::min(p.input->num_frames, p.target->num_frames);
      }
    }
    out.push_back(p);
  }
  return out;
}

struct WindowJob {
  std::size_t pair = 0;
  WindowSpec spec;
};

struct WindowResult {
  std::vector<Tensor<float>> grads;
  LossBreakdown loss;
};

WindowResult run_window(const PreparedPair& pair, const WindowJob& job,
                        const ModelParams<float>& params, const ModelConfig& config,
                        const TrainConfig& tc, std::uint64_t eps_index) {
  const auto data =
      make_window<float>(*pair.input, pair.target, job.spec, config.window, pair.frames);
  Tape<float> tape;
  const auto vars = register_params(tape, params, true);
  Xoshiro256pp rng = Xoshiro256pp::stream(tc.seed, StreamPurpose::kEpsilon, eps_index);
  const auto wl = build_window_loss(tape, vars, config, data, tc.weights, tc.normalize_cls, rng);
  WindowResult out;
  out.loss = wl.breakdown;
  const auto grads = tape.backward(wl.total);
  out.grads.reserve(kParamCount);
  for (const auto& v : vars) out.grads.push_back(grads.at(v));
  return out;
}

void accumulate_loss(LossBreakdown& acc, const LossBreakdown& x, double weight) {
  acc.cls += weight * x.cls;
  acc.rec += weight * x.rec;
  acc.kld += weight * x.kld;
  acc.total += weight * x.total;
  acc.frames_counted += x.frames_counted;
}

double validation_score(const DetectionRun& run, Metric metric, std::string& measure) {
  const MetricReport report = evaluate_run(run, metric);
  if (report.classes_present > 0) {
    measure = std::string(metric_name(metric));
    return report.mean;
  }
  measure = "accuracy";
  return frame_accuracy(run);
}

}  // namespace

TrainResult train_run(const DatasetCatalog& catalog, std::span<const TrainPair> train,
                      std::span<const TrainPair> val, const ModelConfig& config,
                      const TrainConfig& tc, const EpochCallback& on_epoch) {
  config.validate();
  tc.validate();
  if (catalog.num_classes != config.num_classes) {
    throw DataError("train: catalog has C=" + std::to_string(catalog.num_classes) +
                    ", model expects " + std::to_string(config.num_classes));
  }
  if (train.empty()) throw DataError("train: no training sequences");
  const auto pairs = prepare_pairs(catalog, train, config, tc);

  std::vector<std::size_t> val_sequences;
  for (const auto& p : (val.empty() ? train : val)) val_sequences.push_back(p.input);

  TrainResult result;
  TrainLog& log = result.log;
  for (const auto& p : pairs) log.windows_per_epoch += windows_per_sequence(p.frames, config.window);
  const std::size_t steps_per_epoch = (log.windows_per_epoch + tc.batch_size - 1) / tc.batch_size;
  log.planned_steps = tc.epochs * steps_per_epoch;

  ModelParams<float> params = ModelParams<float>::initialize(config, tc.seed);
  result.params = params;
  auto adam = AdamState<float>::zeros_like(params.tensors);
  bool have_best = false;
  std::size_t since_best = 0;
  std::uint64_t window_counter = 0;

  for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
    Xoshiro256pp rng = Xoshiro256pp::stream(tc.seed, StreamPurpose::kWindows, epoch);
    std::vector<WindowJob> jobs;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      for (auto& spec : sample_windows(pairs[i].frames, config.window, rng, tc.fixed_stride)) {
        jobs.push_back({i, std::move(spec)});
      }
    }
    rng.shuffle(std::span<WindowJob>(jobs));

    EpochRecord record;
    record.epoch = epoch;
    for (std::size_t begin = 0; begin < jobs.size(); begin += tc.batch_size) {
      const std::size_t count = std::min(tc.batch_size, jobs.size() - begin);
      std::vector<WindowResult> results(count);
      const std::uint64_t first_eps = window_counter;
      window_counter += count;
      detail::parallel_for(count, tc.threads, [&](std::size_t k) {
        const auto& job = jobs[begin + k];
        results[k] = run_window(pairs[job.pair], job, params, config, tc, first_eps + k);
      });

      // Ordered reduction keeps the result independent of the thread count.
      std::vector<Tensor<float>> grads = std::move(results[0].grads);
      for (std::size_t k = 1; k < count; ++k) {
        for (std::size_t i = 0; i < kParamCount; ++i) {
          auto dst = grads[i].data();
          const auto src = results[k].grads[i].data();
          for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += src[e];
        }
      }
      const float inv = 1.0f / static_cast<float>(count);
      for (auto& g : grads) {
        for (auto& e : g.data()) e *= inv;
      }

      StepRecord step;
      step.step = log.steps.size();
      step.epoch = epoch;
      step.lr = cosine_lr(step.step, log.planned_steps, tc.lr0, tc.lr_min);
      for (const auto& r : results) accumulate_loss(step.loss, r.loss, 1.0 / static_cast<double>(count));
      if (!std::isfinite(step.loss.total)) {
        throw NumericError("training diverged: non-finite loss at step " +
                           std::to_string(step.step));
      }
      adam_step<float>(params.tensors, grads, adam, step.lr);
      if (!params.all_finite()) {
        throw NumericError("training diverged: non-finite parameters after step " +
                           std::to_string(step.step));
      }
      accumulate_loss(record.loss, step.loss, static_cast<double>(count));
      ++record.steps;
      log.steps.push_back(step);
    }
    const double n_windows = static_cast<double>(jobs.size());
    record.loss.cls /= n_windows;
    record.loss.rec /= n_windows;
    record.loss.kld /= n_windows;
    record.loss.total /= n_windows;

    const DetectionRun run = detect(catalog, val_sequences, params, config, tc.threads);
    record.val_score = validation_score(run, tc.val_metric, record.val_measure);
    if (!have_best || record.val_score > log.best_val_score) {
      have_best = true;
      record.best = true;
      log.best_epoch = epoch;
      log.best_val_score = record.val_score;
      result.params = params;
      since_best = 0;
    } else {
      ++since_best;
    }
    log.epochs.push_back(record);
    if (on_epoch) on_epoch(record);
    if (since_best >= tc.patience) break;
  }
  return result;
}

#define PTMA_INSTANTIATE_TRAINER(S)                                                      \
  template WindowData<S> make_window(const FeatureSequence&, const FeatureSequence*,     \
                                     const WindowSpec&, std::size_t, std::size_t);       \
  template struct AdamState<S>;                                                          \
  template void adam_step(std::span<Tensor<S>>, std::span<const Tensor<S>>,              \
                          AdamState<S>&, double, const AdamOptions&);

PTMA_INSTANTIATE_TRAINER(float)
PTMA_INSTANTIATE_TRAINER(double)

#undef PTMA_INSTANTIATE_TRAINER

}  // namespace ptma
