// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// The five-map PNG16 convention shared by dataset samples, fit results and
// external predictors:
//
//   <prefix>diffuse.png    RGB, scale 1
//   <prefix>specular.png   RGB, scale 1
//   <prefix>roughness.png  gray, scale 1
//   <prefix>normal.png     RGB, (n + 1) / 2, i.e. scale 2 and offset -1
//   <prefix>depth.png      gray, scale = max depth (per image)
//   mask.png               8-bit, nonzero on the object
//
// Encodings are recorded as {"scale", "offset"} objects keyed by file stem.

#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "polarcap/core/error.hpp"
#include "polarcap/io/png.hpp"
#include "polarcap/svbrdf_maps.hpp"

namespace polarcap::io {

inline constexpr Png16Encoding kUnitEncoding{1.0, 0.0, false};
inline constexpr Png16Encoding kNormalEncoding{2.0, -1.0, false};
inline constexpr const char* kMapStems[] = {"diffuse", "specular", "roughness", "normal", "depth"};

inline nlohmann::json to_json(const Png16Encoding& e) { return {{"scale", e.scale}, {"offset", e.offset}}; }

inline Png16Encoding encoding_from(const nlohmann::json& j, const std::string& what) {
  try {
    Png16Encoding e{j.at("scale").get<double>(), j.value("offset", 0.0), false};
    if (!(e.scale > 0.0)) fail(ErrorCategory::kParse, "non-positive scale for " + what);
    return e;
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCategory::kParse, "bad encoding entry for " + what);
  }
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::kIo, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCategory::kParse, "'" + path + "': " + e.what());
  }
}

/// Writes JSON followed by a newline, via a temporary file so that a
/// reader never sees a partial document.
inline void write_json(const std::string& path, const nlohmann::json& j, int indent = 1) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCategory::kIo, "cannot open '" + tmp + "' for writing");
    out << j.dump(indent) << '\n';
    if (!out) fail(ErrorCategory::kIo, "failed to write '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCategory::kIo, "cannot rename '" + tmp + "': " + ec.message());
}

/// Writes the five maps (zeroed outside the mask) and mask.png into `dir`.
/// Returns the encodings keyed by "<prefix><stem>".
inline nlohmann::json write_maps(const std::string& dir, const SvbrdfMaps& maps, const std::string& prefix = "") {
  namespace fs = std::filesystem;
  maps.validate();
  fs::create_directories(dir);
  const auto path = [&](const std::string& stem) { return (fs::path(dir) / (stem + ".png")).string(); };
  const auto masked = [&](auto img) {
    for (std::size_t i = 0; i < img.size(); ++i) {
      if (!maps.mask[i][0]) img[i].fill(0.0);
    }
    return img;
  };
  nlohmann::json enc;
  const ScalarImage depth = masked(maps.depth);
  const Png16Encoding depth_enc = auto_encoding(depth);
  write_png16(path(prefix + "diffuse"), masked(maps.diffuse), kUnitEncoding);
  write_png16(path(prefix + "specular"), masked(maps.specular), kUnitEncoding);
  write_png16(path(prefix + "roughness"), masked(maps.roughness), kUnitEncoding);
  write_png16(path(prefix + "normal"), masked(maps.normal), kNormalEncoding);
  write_png16(path(prefix + "depth"), depth, depth_enc);
  write_mask_png(path("mask"), maps.mask);
  enc[prefix + "diffuse"] = to_json(kUnitEncoding);
  enc[prefix + "specular"] = to_json(kUnitEncoding);
  enc[prefix + "roughness"] = to_json(kUnitEncoding);
  enc[prefix + "normal"] = to_json(kNormalEncoding);
  enc[prefix + "depth"] = to_json(depth_enc);
  return enc;
}

/// Reads maps written by write_maps. Encodings missing from `enc` fall back
/// to the fixed conventions; depth without a recorded scale is an error.
/// Decoded normals are renormalized on the mask; everything is zero off it.
inline SvbrdfMaps read_maps(const std::string& dir, const nlohmann::json& enc, const std::string& prefix = "") {
  namespace fs = std::filesystem;
  const auto path = [&](const std::string& stem) { return (fs::path(dir) / (stem + ".png")).string(); };
  const auto encoding = [&](const std::string& key, const Png16Encoding& fallback) {
    return enc.contains(key) ? encoding_from(enc.at(key), key) : fallback;
  };
  for (const char* stem : kMapStems) {
    if (!fs::exists(path(prefix + stem))) fail(ErrorCategory::kIo, "missing map '" + path(prefix + stem) + "'");
  }
  if (!fs::exists(path("mask"))) fail(ErrorCategory::kIo, "missing mask '" + path("mask") + "'");
  if (!enc.contains(prefix + "depth")) fail(ErrorCategory::kParse, "no depth encoding recorded in '" + dir + "'");

  SvbrdfMaps m;
  m.mask = read_mask_png(path("mask"));
  const int w = m.mask.width(), h = m.mask.height();
  m.diffuse = read_png_as<3>(path(prefix + "diffuse"), encoding(prefix + "diffuse", kUnitEncoding), w, h);
  m.specular = read_png_as<3>(path(prefix + "specular"), encoding(prefix + "specular", kUnitEncoding), w, h);
  m.roughness = read_png_as<1>(path(prefix + "roughness"), encoding(prefix + "roughness", kUnitEncoding), w, h);
  m.normal = read_png_as<3>(path(prefix + "normal"), encoding(prefix + "normal", kNormalEncoding), w, h);
  m.depth = read_png_as<1>(path(prefix + "depth"), encoding(prefix + "depth", kUnitEncoding), w, h);
  for (std::size_t i = 0; i < m.mask.size(); ++i) {
    if (!m.mask[i][0]) {
      m.diffuse[i].fill(0.0);
      m.specular[i].fill(0.0);
      m.roughness[i][0] = 0.0;
      m.normal[i].fill(0.0);
      m.depth[i][0] = 0.0;
      continue;
    }
    const Vec3 n = m.normal_at(i);
    const double len = length(n);
    m.set_normal(i, len > 0.0 ? n / len : Vec3{0.0, 0.0, 1.0});
  }
  return m;
}

/// Standalone map directory: the maps plus maps.json holding the encodings
/// and any caller metadata under "meta".
inline void write_map_set(const std::string& dir, const SvbrdfMaps& maps, const nlohmann::json& meta = {}) {
  nlohmann::json j;
  j["encodings"] = write_maps(dir, maps);
  if (!meta.is_null()) j["meta"] = meta;
  write_json((std::filesystem::path(dir) / "maps.json").string(), j);
}

inline SvbrdfMaps read_map_set(const std::string& dir) {
  const nlohmann::json j = read_json((std::filesystem::path(dir) / "maps.json").string());
  if (!j.contains("encodings")) fail(ErrorCategory::kParse, "maps.json in '" + dir + "' lacks encodings");
  return read_maps(dir, j.at("encodings"));
}

}  // namespace polarcap::io
