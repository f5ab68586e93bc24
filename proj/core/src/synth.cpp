// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include "ptma/synth.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "ptma/random.hpp"

namespace ptma {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix gaussian(std::size_t rows, std::size_t cols, Xoshiro256pp& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Stream layout: index 0 holds the globals (base matrix, class means, view
// perturbations, subject offsets); recording r uses index r + 1.
Xoshiro256pp global_stream(const SynthSpec& spec) {
  return Xoshiro256pp::stream(spec.seed, StreamPurpose::kSynth, 0);
}

struct Globals {
  std::vector<Matrix> views;
  std::vector<Eigen::VectorXd> class_means;  // index 0 = background
  std::vector<Eigen::VectorXd> subject_offsets;
};

Globals make_globals(const SynthSpec& spec) {
  Xoshiro256pp rng = global_stream(spec);
  const std::size_t D = spec.feature_dim, L = spec.latent_dim;
  Globals g;
  const Matrix base = gaussian(D, L, rng);
  for (std::size_t v = 0; v < spec.n_views; ++v) {
    Matrix r = base + spec.view_variation * gaussian(D, L, rng);
    if (spec.orthonormal) {
      Eigen::HouseholderQR<Matrix> qr(r);
      Matrix q = qr.householderQ() * Matrix::Identity(D, L);
      // Fix the sign ambiguity of QR so R_v stays close to r.
      const Matrix upper = qr.matrixQR().topRows(L).template triangularView<Eigen::Upper>();
      for (std::size_t c = 0; c < L; ++c) {
        if (upper(c, c) < 0) q.col(c) *= -1.0;
      }
      r = q;
    } else {
      r /= std::sqrt(static_cast<double>(D));
    }
    g.views.push_back(std::move(r));
  }
  for (std::size_t c = 0; c <= spec.num_classes; ++c) {
    Eigen::VectorXd m = gaussian(L, 1, rng);
    m *= spec.class_separation / std::max(m.norm(), 1e-12);
    g.class_means.push_back(std::move(m));
  }
  for (std::size_t s = 0; s < spec.n_subjects; ++s) {
    g.subject_offsets.push_back(spec.subject_scale * gaussian(L, 1, rng));
  }
  return g;
}

std::vector<std::uint16_t> label_track(const SynthSpec& spec, Xoshiro256pp& rng) {
  std::vector<std::uint16_t> labels;
  labels.reserve(spec.num_frames);
  bool action = rng.uniform() < 0.5;
  while (labels.size() < spec.num_frames) {
    const auto len = static_cast<std::size_t>(rng.uniform_int(spec.seg_min, spec.seg_max));
    const auto label = action ? static_cast<std::uint16_t>(rng.uniform_int(1, spec.num_classes))
                              : std::uint16_t{0};
    for (std::size_t i = 0; i < len && labels.size() < spec.num_frames; ++i) {
      labels.push_back(label);
    }
    action = !action;
  }
  return labels;
}

}  // namespace

void SynthSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("synth spec: ") + what);
  };
  require(n_subjects >= 1, "n_subjects must be >= 1");
  require(n_views >= 1, "n_views must be >= 1");
  require(videos_per_subject >= 1, "videos_per_subject must be >= 1");
  require(num_classes >= 1, "num_classes must be >= 1");
  require(num_classes < 65535, "num_classes must fit in u16 labels");
  require(latent_dim >= 1, "latent_dim must be >= 1");
  require(feature_dim >= latent_dim, "feature_dim must be >= latent_dim");
  require(num_frames >= 1, "num_frames must be >= 1");
  require(seg_min >= 1 && seg_min <= seg_max, "need 1 <= seg_min <= seg_max");
  require(class_separation >= 0 && jitter >= 0 && noise >= 0 && view_variation >= 0 &&
              subject_scale >= 0,
          "scales must be >= 0");
  require(ar_coeff >= 0 && ar_coeff < 1, "ar_coeff must lie in [0, 1)");
}

std::vector<std::vector<double>> synth_view_matrices(const SynthSpec& spec) {
  spec.validate();
  std::vector<std::vector<double>> out;
  for (const auto& r : make_globals(spec).views) {
    out.emplace_back(r.data(), r.data() + r.size());
  }
  return out;
}

DatasetCatalog synth_generate(const SynthSpec& spec) {
  spec.validate();
  const Globals g = make_globals(spec);
  const std::size_t D = spec.feature_dim, L = spec.latent_dim, K = spec.num_frames;
  const double innovation = std::sqrt(1.0 - spec.ar_coeff * spec.ar_coeff) * spec.jitter;

  DatasetCatalog catalog;
  catalog.num_classes = spec.num_classes;
  catalog.feature_dim = D;
  std::uint32_t video_id = 0;
  for (std::size_t s = 0; s < spec.n_subjects; ++s) {
    for (std::size_t k = 0; k < spec.videos_per_subject; ++k, ++video_id) {
      Xoshiro256pp rng =
          Xoshiro256pp::stream(spec.seed, StreamPurpose::kSynth, std::uint64_t{video_id} + 1);
      const auto labels = label_track(spec, rng);

      Matrix latent(K, L);
      Eigen::VectorXd jit = spec.jitter * gaussian(L, 1, rng);
      for (std::size_t t = 0; t < K; ++t) {
        if (t > 0) jit = spec.ar_coeff * jit + innovation * gaussian(L, 1, rng);
        latent.row(t) = (g.class_means[labels[t]] + g.subject_offsets[s] + jit).transpose();
      }

      for (std::size_t v = 0; v < spec.n_views; ++v) {
        const Matrix x = latent * g.views[v].transpose() + spec.noise * gaussian(K, D, rng);
        FeatureSequence seq;
        seq.num_frames = K;
        seq.feature_dim = D;
        seq.num_classes = spec.num_classes;
        seq.features.resize(K * D);
        for (std::size_t i = 0; i < K * D; ++i) seq.features[i] = static_cast<float>(x.data()[i]);
        seq.labels = labels;
        seq.view_id = static_cast<std::uint32_t>(v + 1);
        seq.subject_id = static_cast<std::uint32_t>(s + 1);
        seq.video_id = video_id;
        seq.fps = spec.fps;
        catalog.sequences.push_back(std::move(seq));
      }
    }
  }
  catalog.validate();
  return catalog;
}

}  // namespace ptma
