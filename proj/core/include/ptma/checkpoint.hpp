// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ptma/model.hpp"

namespace ptma {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary PTMACKPT file, little-endian:
///   "PTMACKPT", u32 version,
///   config: u32 D, E, D_z, C, T, enc_hidden, dec_hidden, mode; f64 alpha,
///   then per parameter: u32 name length, name bytes, u32 rank,
///   u32 extents[rank], f32 data.
std::vector<char> serialize_checkpoint(const ModelConfig& config,
                                       const ModelParams<float>& params);
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                     const ModelParams<float>& params);

struct Checkpoint {
  ModelConfig config;
  ModelParams<float> params;
};

/// Throws DataError on a bad magic, version, truncation, unknown or
/// misordered tensor names, or shapes that disagree with the stored config.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
/// 16 lowercase hex digits of fnv1a64.
std::string digest_hex(std::string_view bytes);
/// digest_hex of a file's contents; throws DataError if unreadable.
std::string file_digest(const std::filesystem::path& path);

}  // namespace ptma
