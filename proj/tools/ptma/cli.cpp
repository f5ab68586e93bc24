// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ptma/checkpoint.hpp"
#include "ptma/dataio.hpp"
#include "ptma/grad_check.hpp"
#include "ptma/metrics.hpp"
#include "ptma/model.hpp"
#include "ptma/objectives.hpp"
#include "ptma/protocol.hpp"
#include "ptma/split.hpp"
#include "ptma/stream.hpp"
#include "ptma/synth.hpp"
#include "ptma/trainer.hpp"

#ifndef PTMA_VERSION
#define PTMA_VERSION "0.0.0"
#endif
#ifndef PTMA_GIT_REV
#define PTMA_GIT_REV "unknown"
#endif

namespace ptma::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Options {
  // common
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out_dir = ".";

  // data / protocol
  std::string catalog;
  std::string protocol = "cv";
  std::vector<std::uint32_t> train_views;
  std::uint32_t test_view = 0;
  std::uint32_t recon_view = 0;

  // model
  std::string mode = "full";
  double alpha = 0.0;
  std::size_t latent_dim = 256;
  std::size_t window = 64;
  std::size_t embed_dim = 512;
  std::size_t enc_hidden = 256;
  std::size_t dec_hidden = 256;

  // training
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  double lr = 1.4e-4;
  double lr_min = 0.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lambda3 = 0.1;
  std::size_t patience = 3;
  bool fixed_stride = false;
  bool normalize_cls = false;
  bool truncate_pairs = false;
  std::string metric = "map";

  // eval / infer
  std::string checkpoint;
  std::string features;
  std::string out_file;
  bool dump_latents = false;
  bool use_batch = false;
  std::uint32_t view = 0;

  // synth
  SynthSpec synth;

  // gradcheck
  bool tiny = false;
  double gc_eps = 1e-5;
  double gc_tol = 1e-4;
  std::size_t feature_dim = 8;
  std::size_t num_classes = 2;
};

/// Inputs, outputs and timing of one command, written as
/// <out-dir>/<command>.manifest.json.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args)
      : command_(std::move(command)), args_(args),
        start_(std::chrono::steady_clock::now()) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    started_ = os.str();
  }

  void input(const fs::path& p) { inputs_.push_back({p.string(), file_digest(p)}); }
  void output(const fs::path& p) { outputs_.push_back(p.string()); }
  void config(std::string snapshot) { config_ = std::move(snapshot); }

  void write(const fs::path& dir, const Options& o) const {
    ordered_json j;
    j["command"] = command_;
    j["argv"] = args_;
    j["seed"] = o.seed;
    j["threads"] = o.threads;
    j["config"] = config_;
    auto& in = j["inputs"] = ordered_json::array();
    for (const auto& [path, digest] : inputs_) in.push_back({{"path", path}, {"digest", digest}});
    j["outputs"] = outputs_;
    j["started_at"] = started_;
    j["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    j["build"] = {{"version", PTMA_VERSION},
                  {"git", PTMA_GIT_REV},
                  {"compiler", __VERSION__}};
    fs::create_directories(dir);
    std::ofstream out(dir / (command_ + ".manifest.json"));
    if (!out) throw DataError("cannot write manifest in " + dir.string());
    out << j.dump(2) << '\n';
  }

 private:
  std::string command_;
  std::vector<std::string> args_;
  std::string config_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> outputs_;
  std::string started_;
  std::chrono::steady_clock::time_point start_;
};

void add_common(CLI::App* sub, Options& o) {
  sub->set_config("--config", "", "Flat key=value file; command-line flags take precedence");
  sub->add_option("--seed", o.seed, "Seed of every random stream")->capture_default_str();
  sub->add_option("--threads", o.threads, "Worker threads (1 is the reproducible reference)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
}

void add_split_flags(CLI::App* sub, Options& o) {
  sub->add_option("--catalog", o.catalog, "catalog.json written by synth")->required();
  sub->add_option("--protocol", o.protocol, "cs, cv, csv, m-cv or m-csv")
      ->check(CLI::IsMember({"cs", "cv", "csv", "m-cv", "m-csv"}))
      ->capture_default_str();
  sub->add_option("--train-view,--train-views", o.train_views,
                  "Training view; in m-c(s)v optionally 'input,recon'")
      ->delimiter(',')
      ->required();
  sub->add_option("--test-view", o.test_view, "Test view");
  sub->add_option("--recon-view", o.recon_view, "Reconstruction view for m-c(s)v");
}

void add_model_flags(CLI::App* sub, Options& o) {
  sub->add_option("--mode", o.mode, "baseline-gru, query-only, ae, kld-only or full")
      ->check(CLI::IsMember({"baseline-gru", "query-only", "ae", "kld-only", "full"}))
      ->capture_default_str();
  sub->add_option("--alpha", o.alpha, "Attention temperature (0 = embed dim)")
      ->capture_default_str();
  sub->add_option("--latent-dim", o.latent_dim, "Latent dim D_z")->capture_default_str();
  sub->add_option("--window", o.window, "Window length T")->capture_default_str();
  sub->add_option("--embed-dim", o.embed_dim, "Embedding dim E")->capture_default_str();
  sub->add_option("--enc-hidden", o.enc_hidden, "Encoder hidden width")->capture_default_str();
  sub->add_option("--dec-hidden", o.dec_hidden, "Decoder hidden width")->capture_default_str();
}

void add_train_flags(CLI::App* sub, Options& o) {
  sub->add_option("--epochs", o.epochs)->capture_default_str();
  sub->add_option("--batch-size", o.batch_size)->capture_default_str();
  sub->add_option("--lr", o.lr, "Initial learning rate")->capture_default_str();
  sub->add_option("--lr-min", o.lr_min, "Final cosine learning rate")->capture_default_str();
  sub->add_option("--lambda1", o.lambda1, "Classification weight")->capture_default_str();
  sub->add_option("--lambda2", o.lambda2, "Reconstruction weight")->capture_default_str();
  sub->add_option("--lambda3", o.lambda3, "KL weight")->capture_default_str();
  sub->add_option("--patience", o.patience, "Early-stopping patience")->capture_default_str();
  sub->add_flag("--fixed-stride", o.fixed_stride, "Grid windows instead of random starts");
  sub->add_flag("--normalize-cls", o.normalize_cls, "Average L_cls over frames");
  sub->add_flag("--truncate-pairs", o.truncate_pairs,
                "Cut unequal paired views to the shorter length");
  sub->add_option("--metric", o.metric, "Validation metric: map or mcap")
      ->check(CLI::IsMember({"map", "mcap"}))
      ->capture_default_str();
  sub->add_option("--checkpoint", o.checkpoint,
                  "Checkpoint output path (default <out-dir>/model.ptmackpt)");
}

ModelConfig model_config(const Options& o, const DatasetCatalog* catalog) {
  ModelConfig c;
  c.feature_dim = catalog ? catalog->feature_dim : o.feature_dim;
  c.num_classes = catalog ? catalog->num_classes : o.num_classes;
  c.embed_dim = o.embed_dim;
  c.latent_dim = o.latent_dim;
  c.window = o.window;
  c.alpha = o.alpha;
  c.enc_hidden = o.enc_hidden;
  c.dec_hidden = o.dec_hidden;
  c.mode = parse_mode(o.mode);
  c.validate();
  return c;
}

SplitRequest split_request(const Options& o) {
  SplitRequest r;
  r.protocol = parse_protocol(o.protocol);
  r.train_views = o.train_views;
  r.seed = o.seed;
  if (o.test_view != 0) r.test_view = o.test_view;
  if (o.recon_view != 0) {
    if (!is_multi_view(r.protocol)) {
      throw ConfigError("--recon-view only applies to m-cv and m-csv");
    }
    if (r.train_views.size() != 1) {
      throw ConfigError("give the reconstruction view either in --train-views or --recon-view");
    }
    r.train_views.push_back(o.recon_view);
  }
  return r;
}

ordered_json split_json(const DatasetCatalog& catalog, const ProtocolSplit& split) {
  auto pair_json = [&](const TrainPair& p) {
    const auto& in = catalog.sequences[p.input];
    ordered_json j{{"index", p.input}, {"video_id", in.video_id}, {"view_id", in.view_id},
                   {"subject_id", in.subject_id}};
    if (p.target) {
      j["target_index"] = *p.target;
      j["target_view_id"] = catalog.sequences[*p.target].view_id;
    }
    return j;
  };
  ordered_json j;
  j["protocol"] = protocol_name(split.protocol);
  j["tag"] = split.tag();
  j["train_views"] = split.train_views;
  j["test_view"] = split.test_view;
  j["train_subjects"] = split.train_subjects;
  j["val_subjects"] = split.val_subjects;
  j["test_subjects"] = split.test_subjects;
  auto& train = j["train"] = ordered_json::array();
  for (const auto& p : split.train) train.push_back(pair_json(p));
  auto& val = j["val"] = ordered_json::array();
  for (const auto& p : split.val) val.push_back(pair_json(p));
  auto& test = j["test"] = ordered_json::array();
  for (auto i : split.test) {
    const auto& s = catalog.sequences[i];
    test.push_back({{"index", i}, {"video_id", s.video_id}, {"view_id", s.view_id},
                    {"subject_id", s.subject_id}});
  }
  return j;
}

void write_json(const fs::path& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_scores_csv(std::ostream& out, const std::vector<std::vector<double>>& rows) {
  out.precision(9);
  const std::size_t n = rows.empty() ? 0 : rows[0].size();
  out << "frame_index,argmax_label";
  for (std::size_t c = 0; c < n; ++c) out << ",score_" << c;
  out << '\n';
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const auto& r = rows[t];
    out << t << ',' << (std::max_element(r.begin(), r.end()) - r.begin());
    for (double p : r) out << ',' << p;
    out << '\n';
  }
}

// ---- subcommands ----------------------------------------------------------

int cmd_synth(const Options& o, Manifest& m, std::ostream& out) {
  SynthSpec spec = o.synth;
  spec.seed = o.seed;
  const auto catalog = synth_generate(spec);
  const auto path = save_catalog(catalog, o.out_dir);
  m.output(path);
  out << "wrote " << catalog.sequences.size() << " sequences to " << path.string() << '\n';
  return kExitOk;
}

int cmd_split(const Options& o, Manifest& m, std::ostream& out) {
  m.input(o.catalog);
  const auto catalog = load_catalog(o.catalog);
  const auto split = make_protocol_split(catalog, split_request(o));
  fs::create_directories(o.out_dir);
  const auto path = fs::path(o.out_dir) / "split.json";
  write_json(path, split_json(catalog, split));
  m.output(path);
  out << split.tag() << ": " << split.train.size() << " train, " << split.val.size()
      << " val, " << split.test.size() << " test sequences\n";
  return kExitOk;
}

int cmd_train(const Options& o, Manifest& m, std::ostream& out) {
  m.input(o.catalog);
  const auto catalog = load_catalog(o.catalog);
  const auto split = make_protocol_split(catalog, split_request(o));
  const ModelConfig config = model_config(o, &catalog);

  TrainConfig tc;
  tc.epochs = o.epochs;
  tc.batch_size = o.batch_size;
  tc.lr0 = o.lr;
  tc.lr_min = o.lr_min;
  tc.weights = {o.lambda1, o.lambda2, o.lambda3};
  tc.seed = o.seed;
  tc.patience = o.patience;
  tc.recon_policy = is_multi_view(split.protocol) ? ReconPolicy::kPairedView : ReconPolicy::kSelf;
  tc.fixed_stride = o.fixed_stride;
  tc.normalize_cls = o.normalize_cls;
  tc.truncate_pairs = o.truncate_pairs;
  tc.threads = o.threads;
  tc.val_metric = parse_metric(o.metric);

  out << split.tag() << " (" << o.protocol << "), mode " << o.mode << ": "
      << split.train.size() << " train / " << split.val.size() << " val sequences\n";
  const auto result = train_run(catalog, split.train, split.val, config, tc,
                                [&](const EpochRecord& e) {
                                  out << "epoch " << e.epoch << "  L=" << e.loss.total
                                      << " cls=" << e.loss.cls << " rec=" << e.loss.rec
                                      << " kld=" << e.loss.kld << "  val " << e.val_measure
                                      << "=" << e.val_score << (e.best ? "  *" : "") << '\n';
                                });

  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  const fs::path ckpt = o.checkpoint.empty() ? dir / "model.ptmackpt" : fs::path(o.checkpoint);
  save_checkpoint(ckpt, config, result.params);
  write_step_csv(result.log, dir / "steps.csv");
  write_epoch_csv(result.log, dir / "epochs.csv");
  write_json(dir / "split.json", split_json(catalog, split));
  for (const auto& p : {ckpt, dir / "steps.csv", dir / "epochs.csv", dir / "split.json"}) {
    m.output(p);
  }
  out << "best epoch " << result.log.best_epoch << " (val " << result.log.best_val_score
      << "), " << result.log.steps.size() << " steps; checkpoint " << ckpt.string() << '\n';
  return kExitOk;
}

int cmd_eval(const Options& o, Manifest& m, std::ostream& out) {
  m.input(o.catalog);
  m.input(o.checkpoint);
  const auto catalog = load_catalog(o.catalog);
  const auto ck = load_checkpoint(o.checkpoint);
  const auto split = make_protocol_split(catalog, split_request(o));
  ProtocolOptions po;
  po.metric = parse_metric(o.metric);
  po.out_dir = o.out_dir;
  po.dump_latents = o.dump_latents;
  po.threads = o.threads;
  po.checkpoint_digest = file_digest(o.checkpoint);
  const auto result = run_protocol(catalog, split, ck.params, ck.config, po);
  m.output(fs::path(o.out_dir) / "report.json");
  m.output(fs::path(o.out_dir) / "frames.csv");
  if (o.dump_latents) m.output(fs::path(o.out_dir) / "latents");
  out << o.protocol << ' ' << result.tag << ' ' << metric_name(po.metric) << " = "
      << std::fixed << std::setprecision(2) << 100.0 * result.report.mean << "% over "
      << result.report.classes_present << " classes, " << result.report.frames << " frames\n";
  return kExitOk;
}

int cmd_infer(const Options& o, Manifest& m, std::ostream& out) {
  m.input(o.checkpoint);
  m.input(o.features);
  const auto ck = load_checkpoint(o.checkpoint);
  const auto seq = read_feature_file(o.features);
  if (seq.feature_dim != ck.config.feature_dim) {
    throw DataError(o.features + ": D=" + std::to_string(seq.feature_dim) +
                    " but the checkpoint expects D=" + std::to_string(ck.config.feature_dim));
  }
  std::vector<std::vector<double>> rows;
  if (o.use_batch) {
    const auto scores = batch_infer(ck.params, ck.config, seq.matrix<float>()).scores;
    for (std::size_t t = 0; t < scores.rows(); ++t) {
      rows.emplace_back(scores.row(t).begin(), scores.row(t).end());
    }
  } else {
    auto state = stream_init(ck.params, ck.config);
    for (std::size_t t = 0; t < seq.num_frames; ++t) {
      const auto step = stream_step<float>(state, ck.params, ck.config, seq.frame(t));
      rows.emplace_back(step.scores.begin(), step.scores.end());
    }
  }
  fs::create_directories(o.out_dir);
  const fs::path path = o.out_file.empty() ? fs::path(o.out_dir) / "infer.csv" : fs::path(o.out_file);
  std::ofstream csv(path);
  if (!csv) throw DataError("cannot write " + path.string());
  write_scores_csv(csv, rows);
  m.output(path);
  out << "scored " << rows.size() << " frames -> " << path.string() << '\n';
  return kExitOk;
}

int cmd_gradcheck(Options o, Manifest& m, std::ostream& out) {
  if (o.tiny) {
    o.window = 4;
    o.feature_dim = 8;
    o.embed_dim = 6;
    o.latent_dim = 3;
    o.num_classes = 2;
    o.enc_hidden = 5;
    o.dec_hidden = 5;
  }
  const ModelConfig config = model_config(o, nullptr);
  const auto params = ModelParams<double>::initialize(config, o.seed);

  Xoshiro256pp data_rng = Xoshiro256pp::stream(o.seed, StreamPurpose::kSynth);
  WindowData<double> window;
  window.input = Tensor<double>::matrix(config.window, config.feature_dim);
  for (auto& v : window.input.data()) v = data_rng.normal();
  window.target = Tensor<double>::matrix(config.window, config.feature_dim);
  for (auto& v : window.target.data()) v = data_rng.normal();
  window.valid.assign(config.window, 1);
  for (std::size_t t = 0; t < config.window; ++t) {
    window.labels.push_back(
        static_cast<std::uint16_t>(data_rng.uniform_int(0, config.num_classes)));
  }
  const LossWeights weights{o.lambda1, o.lambda2, o.lambda3};

  const ScalarGraph f = [&](Tape<double>& tape, std::span<const Var<double>> vars) {
    ParamVars<double> p;
    std::copy(vars.begin(), vars.end(), p.begin());
    Xoshiro256pp eps_rng = Xoshiro256pp::stream(o.seed, StreamPurpose::kEpsilon);
    return build_window_loss(tape, p, config, window, weights, false, eps_rng).total;
  };
  std::vector<std::string> names;
  for (std::size_t i = 0; i < kParamCount; ++i) names.emplace_back(param_name(i));
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = grad_check(f, params.tensors, names, {o.gc_eps, o.gc_tol, 1e-8});
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ordered_json j;
  j["config"] = ordered_json::parse(model_config_json(config));
  j["eps"] = o.gc_eps;
  j["tol"] = o.gc_tol;
  j["loss"] = report.loss;
  j["passed"] = report.passed;
  j["seconds"] = seconds;
  auto& entries = j["params"] = ordered_json::array();
  out << std::left << std::setw(20) << "param" << std::setw(10) << "shape" << "max_rel_err\n";
  for (const auto& e : report.entries) {
    out << std::setw(20) << e.name << std::setw(10) << shape_str(e.shape) << std::scientific
        << std::setprecision(3) << e.max_rel_error << (e.passed ? "" : "  FAIL")
        << (e.non_finite ? "  non-finite" : "") << std::defaultfloat << '\n';
    entries.push_back({{"name", e.name},
                       {"max_rel_error", e.max_rel_error},
                       {"max_abs_error", e.max_abs_error},
                       {"non_finite", e.non_finite},
                       {"passed", e.passed}});
  }
  fs::create_directories(o.out_dir);
  const auto path = fs::path(o.out_dir) / "gradcheck.json";
  write_json(path, j);
  m.output(path);
  out << (report.passed ? "gradcheck passed" : "gradcheck FAILED") << ": worst relative error "
      << report.worst_rel_error() << " (tol " << o.gc_tol << "), " << seconds << " s\n";
  return report.passed ? kExitOk : kExitNumeric;
}

int cmd_dump_latents(const Options& o, Manifest& m, std::ostream& out) {
  m.input(o.checkpoint);
  const auto ck = load_checkpoint(o.checkpoint);
  if (!uses_latent(ck.config.mode)) {
    throw ConfigError("mode " + std::string(mode_name(ck.config.mode)) + " has no latents");
  }
  std::vector<FeatureSequence> inputs;
  if (!o.features.empty()) {
    m.input(o.features);
    inputs.push_back(read_feature_file(o.features));
  } else if (!o.catalog.empty()) {
    m.input(o.catalog);
    for (auto& s : load_catalog(o.catalog).sequences) {
      if (o.view == 0 || s.view_id == o.view) inputs.push_back(std::move(s));
    }
  } else {
    throw ConfigError("dump-latents needs --features or --catalog");
  }
  const fs::path dir = fs::path(o.out_dir) / "latents";
  fs::create_directories(dir);
  for (const auto& seq : inputs) {
    if (seq.feature_dim != ck.config.feature_dim) {
      throw DataError("video " + std::to_string(seq.video_id) + ": D=" +
                      std::to_string(seq.feature_dim) + " but the checkpoint expects D=" +
                      std::to_string(ck.config.feature_dim));
    }
    const auto mu = batch_infer(ck.params, ck.config, seq.matrix<float>()).mu;
    FeatureSequence dump = seq;
    dump.feature_dim = ck.config.latent_dim;
    dump.features.assign(mu.data().begin(), mu.data().end());
    const auto path = dir / ("video" + std::to_string(seq.video_id) + "_view" +
                             std::to_string(seq.view_id) + ".ptmafeat");
    write_feature_file(dump, path);
    m.output(path);
  }
  out << "dumped latents of " << inputs.size() << " sequences to " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-view online action detection: synthetic data, training, evaluation "
               "and streaming inference",
               "ptma"};
  app.require_subcommand(1, 1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-view catalog");
  add_common(synth, o);
  synth->add_option("--subjects", o.synth.n_subjects)->capture_default_str();
  synth->add_option("--views", o.synth.n_views)->capture_default_str();
  synth->add_option("--videos-per-subject", o.synth.videos_per_subject)->capture_default_str();
  synth->add_option("--classes", o.synth.num_classes)->capture_default_str();
  synth->add_option("--frames", o.synth.num_frames)->capture_default_str();
  synth->add_option("--feature-dim", o.synth.feature_dim)->capture_default_str();
  synth->add_option("--synth-latent-dim", o.synth.latent_dim)->capture_default_str();
  synth->add_option("--seg-min", o.synth.seg_min)->capture_default_str();
  synth->add_option("--seg-max", o.synth.seg_max)->capture_default_str();
  synth->add_option("--class-separation", o.synth.class_separation)->capture_default_str();
  synth->add_option("--jitter", o.synth.jitter)->capture_default_str();
  synth->add_option("--ar-coeff", o.synth.ar_coeff)->capture_default_str();
  synth->add_option("--noise", o.synth.noise)->capture_default_str();
  synth->add_option("--view-variation", o.synth.view_variation)->capture_default_str();
  synth->add_option("--subject-scale", o.synth.subject_scale)->capture_default_str();

  auto* split = app.add_subcommand("split", "Write the train/val/test split of a protocol");
  add_common(split, o);
  add_split_flags(split, o);

  auto* train = app.add_subcommand("train", "Train a model under a protocol split");
  add_common(train, o);
  add_split_flags(train, o);
  add_model_flags(train, o);
  add_train_flags(train, o);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a protocol's test set");
  add_common(eval, o);
  add_split_flags(eval, o);
  eval->add_option("--checkpoint", o.checkpoint)->required();
  eval->add_option("--metric", o.metric, "map or mcap")
      ->check(CLI::IsMember({"map", "mcap"}))
      ->capture_default_str();
  eval->add_flag("--dump-latents", o.dump_latents, "Also write per-frame latent means");

  auto* infer = app.add_subcommand("infer", "Score one feature file frame by frame");
  add_common(infer, o);
  infer->add_option("--checkpoint", o.checkpoint)->required();
  infer->add_option("--features", o.features, "PTMAFEAT file")->required();
  infer->add_option("--out", o.out_file, "CSV path (default <out-dir>/infer.csv)");
  infer->add_flag("--batch", o.use_batch, "Whole-sequence inference instead of streaming");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of all gradients");
  add_common(gradcheck, o);
  gradcheck->add_flag("--tiny", o.tiny, "T=4, D=8, E=6, D_z=3, C=2");
  add_model_flags(gradcheck, o);
  gradcheck->add_option("--feature-dim", o.feature_dim)->capture_default_str();
  gradcheck->add_option("--classes", o.num_classes)->capture_default_str();
  gradcheck->add_option("--lambda1", o.lambda1)->capture_default_str();
  gradcheck->add_option("--lambda2", o.lambda2)->capture_default_str();
  gradcheck->add_option("--lambda3", o.lambda3)->capture_default_str();
  gradcheck->add_option("--eps", o.gc_eps)->capture_default_str();
  gradcheck->add_option("--tol", o.gc_tol)->capture_default_str();

  auto* dump = app.add_subcommand("dump-latents", "Write per-frame latent means as PTMAFEAT");
  add_common(dump, o);
  dump->add_option("--checkpoint", o.checkpoint)->required();
  dump->add_option("--features", o.features, "Single PTMAFEAT file");
  dump->add_option("--catalog", o.catalog, "catalog.json");
  dump->add_option("--view", o.view, "Restrict a catalog to one view");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    Manifest manifest(sub->get_name(), args);
    manifest.config(sub->config_to_str(true, false));
    int code = kExitUsage;
    if (sub == synth) code = cmd_synth(o, manifest, out);
    else if (sub == split) code = cmd_split(o, manifest, out);
    else if (sub == train) code = cmd_train(o, manifest, out);
    else if (sub == eval) code = cmd_eval(o, manifest, out);
    else if (sub == infer) code = cmd_infer(o, manifest, out);
    else if (sub == gradcheck) code = cmd_gradcheck(o, manifest, out);
    else if (sub == dump) code = cmd_dump_latents(o, manifest, out);
    manifest.write(o.out_dir, o);
    return code;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ShapeError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace ptma::cli
