// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include "ptma/dataio.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>

#include "binary_io.hpp"

namespace ptma {

namespace detail {

std::vector<char> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path);
}

}  // namespace detail

namespace {

constexpr std::string_view kFeatureMagic = "PTMAFEAT";
constexpr std::size_t kFeatureHeaderBytes = 8 + 6 * 4 + 4;

}  // namespace

void FeatureSequence::validate() const {
  if (num_frames == 0) throw DataError("feature sequence: K must be >= 1");
  if (feature_dim == 0) throw DataError("feature sequence: D must be >= 1");
  if (features.size() != num_frames * feature_dim) {
    throw DataError("feature sequence: " + std::to_string(features.size()) +
                    " feature values for K=" + std::to_string(num_frames) +
                    ", D=" + std::to_string(feature_dim));
  }
  if (labels.size() != num_frames) {
    throw DataError("feature sequence: " + std::to_string(labels.size()) +
                    " labels for K=" + std::to_string(num_frames));
  }
  for (auto l : labels) {
    if (l > num_classes) {
      throw DataError("feature sequence: label " + std::to_string(l) +
                      " exceeds C=" + std::to_string(num_classes));
    }
  }
}

void write_feature_file(const FeatureSequence& seq, const std::filesystem::path& path) {
  seq.validate();
  detail::ByteWriter w;
  w.bytes(kFeatureMagic);
  w.u32(kFeatureFileVersion);
  w.u32(static_cast<std::uint32_t>(seq.num_frames));
  w.u32(static_cast<std::uint32_t>(seq.feature_dim));
  w.u32(static_cast<std::uint32_t>(seq.num_classes));
  w.u32(seq.view_id);
  w.u32(seq.subject_id);
  w.f32(seq.fps);
  for (float v : seq.features) w.f32(v);
  for (auto l : seq.labels) w.u16(l);
  detail::write_file_bytes(path.string(), w.buffer());
}

FeatureSequence read_feature_file(const std::filesystem::path& path) {
  const std::string where = path.string();
  const std::vector<char> bytes = detail::read_file_bytes(where);
  detail::ByteReader r(bytes, where);
  if (r.bytes(kFeatureMagic.size()) != kFeatureMagic) {
    throw DataError(where + ": bad magic, not a PTMAFEAT file");
  }
  const std::uint32_t version = r.u32();
  if (version != kFeatureFileVersion) {
    throw DataError(where + ": unsupported PTMAFEAT version " + std::to_string(version));
  }
  FeatureSequence seq;
  seq.num_frames = r.u32();
  seq.feature_dim = r.u32();
  seq.num_classes = r.u32();
  seq.view_id = r.u32();
  seq.subject_id = r.u32();
  seq.fps = r.f32();

  const std::size_t expected = kFeatureHeaderBytes +
                               seq.num_frames * seq.feature_dim * sizeof(float) +
                               seq.num_frames * sizeof(std::uint16_t);
  if (bytes.size() != expected) {
    throw DataError(where + ": expected " + std::to_string(expected) +
                    " bytes for K=" + std::to_string(seq.num_frames) +
                    ", D=" + std::to_string(seq.feature_dim) + ", file has " +
                    std::to_string(bytes.size()));
  }
  seq.features.resize(seq.num_frames * seq.feature_dim);
  for (auto& v : seq.features) v = r.f32();
  seq.labels.resize(seq.num_frames);
  for (auto& l : seq.labels) l = r.u16();
  seq.validate();
  return seq;
}

std::vector<std::uint32_t> DatasetCatalog::views() const {
  std::set<std::uint32_t> s;
  for (const auto& q : sequences) s.insert(q.view_id);
  return {s.begin(), s.end()};
}

std::vector<std::uint32_t> DatasetCatalog::subjects() const {
  std::set<std::uint32_t> s;
  for (const auto& q : sequences) s.insert(q.subject_id);
  return {s.begin(), s.end()};
}

std::optional<std::size_t> DatasetCatalog::find(std::uint32_t video_id,
                                                std::uint32_t view_id) const {
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    if (sequences[i].video_id == video_id && sequences[i].view_id == view_id) return i;
  }
  return std::nullopt;
}

void DatasetCatalog::validate() const {
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& q : sequences) {
    q.validate();
    if (q.feature_dim != feature_dim || q.num_classes != num_classes) {
      throw DataError("catalog: video " + std::to_string(q.video_id) + " view " +
                      std::to_string(q.view_id) + " has D=" +
                      std::to_string(q.feature_dim) + ", C=" + std::to_string(q.num_classes) +
                      " but catalog has D=" + std::to_string(feature_dim) +
                      ", C=" + std::to_string(num_classes));
    }
    if (!seen.emplace(q.video_id, q.view_id).second) {
      throw DataError("catalog: duplicate (video " + std::to_string(q.video_id) +
                      ", view " + std::to_string(q.view_id) + ")");
    }
  }
}

std::filesystem::path save_catalog(const DatasetCatalog& catalog,
                                   const std::filesystem::path& dir) {
  catalog.validate();
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = "ptma-catalog";
  manifest["version"] = 1;
  manifest["num_classes"] = catalog.num_classes;
  manifest["feature_dim"] = catalog.feature_dim;
  auto& list = manifest["sequences"] = nlohmann::ordered_json::array();
  for (const auto& q : catalog.sequences) {
    const std::string name = "video" + std::to_string(q.video_id) + "_view" +
                             std::to_string(q.view_id) + ".ptmafeat";
    write_feature_file(q, dir / name);
    list.push_back({{"path", name},
                    {"video_id", q.video_id},
                    {"view_id", q.view_id},
                    {"subject_id", q.subject_id},
                    {"num_frames", q.num_frames}});
  }
  const auto path = dir / "catalog.json";
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << manifest.dump(2) << '\n';
  return path;
}

DatasetCatalog load_catalog(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open " + manifest_path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  DatasetCatalog catalog;
  try {
    catalog.num_classes = manifest.at("num_classes").get<std::size_t>();
    catalog.feature_dim = manifest.at("feature_dim").get<std::size_t>();
    const auto base = manifest_path.parent_path();
    for (const auto& entry : manifest.at("sequences")) {
      FeatureSequence q = read_feature_file(base / entry.at("path").get<std::string>());
      q.video_id = entry.at("video_id").get<std::uint32_t>();
      if (q.view_id != entry.at("view_id").get<std::uint32_t>() ||
          q.subject_id != entry.at("subject_id").get<std::uint32_t>()) {
        throw DataError(manifest_path.string() + ": view/subject of " +
                        entry.at("path").get<std::string>() +
                        " disagree with the feature file header");
      }
      catalog.sequences.push_back(std::move(q));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  catalog.validate();
  return catalog;
}

}  // namespace ptma
