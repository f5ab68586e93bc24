// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include "ptma/checkpoint.hpp"

#include <cstdio>

#include "binary_io.hpp"

namespace ptma {

namespace {

constexpr std::string_view kCheckpointMagic = "PTMACKPT";

}  // namespace

std::vector<char> serialize_checkpoint(const ModelConfig& config,
                                       const ModelParams<float>& params) {
  config.validate();
  params.check_shapes(config);
  detail::ByteWriter w;
  w.bytes(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  for (std::size_t v : {config.feature_dim, config.embed_dim, config.latent_dim,
                        config.num_classes, config.window, config.enc_hidden,
                        config.dec_hidden}) {
    w.u32(static_cast<std::uint32_t>(v));
  }
  w.u32(static_cast<std::uint32_t>(config.mode));
  w.f64(config.alpha);
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const auto name = param_name(i);
    const auto& t = params.tensors[i];
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (auto extent : t.shape()) w.u32(static_cast<std::uint32_t>(extent));
    for (float v : t.data()) w.f32(v);
  }
  return w.buffer();
}

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                     const ModelParams<float>& params) {
  detail::write_file_bytes(path.string(), serialize_checkpoint(config, params));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string where = path.string();
  const auto bytes = detail::read_file_bytes(where);
  detail::ByteReader r(bytes, where);
  if (r.bytes(kCheckpointMagic.size()) != kCheckpointMagic) {
    throw DataError(where + ": bad magic, not a PTMACKPT file");
  }
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw DataError(where + ": unsupported PTMACKPT version " + std::to_string(version));
  }
  Checkpoint ck;
  ModelConfig& c = ck.config;
  c.feature_dim = r.u32();
  c.embed_dim = r.u32();
  c.latent_dim = r.u32();
  c.num_classes = r.u32();
  c.window = r.u32();
  c.enc_hidden = r.u32();
  c.dec_hidden = r.u32();
  const auto mode = r.u32();
  if (mode > static_cast<std::uint32_t>(Mode::kFull)) {
    throw DataError(where + ": unknown mode code " + std::to_string(mode));
  }
  c.mode = static_cast<Mode>(mode);
  c.alpha = r.f64();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw DataError(where + ": " + e.what());
  }

  const auto shapes = param_shapes(c);
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const auto name_len = r.u32();
    const std::string name = r.bytes(name_len);
    if (name != param_name(i)) {
      throw DataError(where + ": expected tensor " + std::string(param_name(i)) + ", found '" +
                      name + "'");
    }
    Shape shape(r.u32());
    for (auto& extent : shape) extent = r.u32();
    if (shape != shapes[i]) {
      throw DataError(where + ": tensor " + name + " has shape " + shape_str(shape) +
                      ", config implies " + shape_str(shapes[i]));
    }
    Tensor<float> t(shape);
    for (auto& v : t.data()) v = r.f32();
    ck.params.tensors[i] = std::move(t);
  }
  if (!r.at_end()) {
    throw DataError(where + ": " + std::to_string(r.remaining()) +
                    " trailing bytes after the last tensor");
  }
  return ck;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string file_digest(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path.string());
  return digest_hex(std::string_view(bytes.data(), bytes.size()));
}

}  // namespace ptma
