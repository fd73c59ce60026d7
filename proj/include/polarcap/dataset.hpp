// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic dataset generation: sample planning over mesh x material
// catalogs, per-sample rendering and cue extraction, the on-disk sample
// layout and the ndjson manifest.
//
// Layout:
//   <root>/manifest.ndjson
//   <root>/<split>/<id>/{i000,i045,i090,i135,full,stokes_vis,stokes_norm,
//                        diffuse_cue,gt_diffuse,gt_specular,gt_roughness,
//                        gt_normal,gt_depth,mask}.png
//   <root>/<split>/<id>/meta.json   (the sample record; written last)

#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "polarcap/core/error.hpp"
#include "polarcap/core/hash.hpp"
#include "polarcap/core/log.hpp"
#include "polarcap/cues.hpp"
#include "polarcap/inverse/fit.hpp"
#include "polarcap/io/maps.hpp"
#include "polarcap/io/png.hpp"
#include "polarcap/render/material.hpp"
#include "polarcap/render/mesh.hpp"
#include "polarcap/render/shade.hpp"
#include "polarcap/stokes.hpp"

namespace polarcap::dataset {

using nlohmann::json;

// Catalog sizes used for the published training and test sets.
inline constexpr int kTrainMeshes = 20;
inline constexpr int kTrainMaterials = 2000;
inline constexpr int kTestMeshes = 6;
inline constexpr int kTestMaterials = 30;
inline constexpr int kBenchmarkRecords = 250;

inline constexpr const char* kPolarizedStems[] = {"i000", "i045", "i090", "i135"};
inline constexpr const char* kCueStems[] = {"stokes_norm", "diffuse_cue"};
inline constexpr const char* kGtStems[] = {"gt_diffuse", "gt_specular", "gt_roughness", "gt_normal", "gt_depth"};
inline constexpr int kManifestVersion = 1;

struct SplitConfig {
  std::vector<std::string> meshes;
  std::vector<std::string> materials;
  int rotations = 1;  // records per (mesh, material) pair when `samples` is 0
  int samples = 0;    // if > 0, exact record count drawn over shuffled pairs
};

struct DatasetConfig {
  std::string name = "dataset";
  std::uint64_t seed = 0;
  int resolution = 512;
  double fov_deg = 40.0;
  double object_distance = 3.0;
  double noise_sigma = 0.05;
  double max_elevation_deg = 45.0;
  bool full_rotation = false;  // uniform over SO(3) instead of azimuth x elevation
  bool uv_augment = true;
  std::map<std::string, SplitConfig> splits;

  void validate() const {
    const auto bad = [](const std::string& m) { fail(ErrorCategory::kConfig, "dataset config: " + m); };
    if (resolution < 1) bad("resolution must be >= 1");
    if (!(fov_deg >= 10.0 && fov_deg <= 120.0)) bad("fov_deg must be in [10, 120]");
    if (!(object_distance > 1.0)) bad("object_distance must be > 1 (meshes are unit-sphere normalized)");
    if (!(noise_sigma >= 0.0)) bad("noise_sigma must be >= 0");
    if (!(max_elevation_deg >= 0.0 && max_elevation_deg <= 90.0)) bad("max_elevation_deg must be in [0, 90]");
    if (splits.empty()) bad("no splits");
    for (const auto& [name, s] : splits) {
      if (name.empty() || name.find('/') != std::string::npos || name == "." || name == "..") {
        bad("invalid split name '" + name + "'");
      }
      if (s.meshes.empty() || s.materials.empty()) bad("split '" + name + "' needs >= 1 mesh and material");
      if (s.rotations < 1) bad("split '" + name + "' rotations must be >= 1");
      if (s.samples < 0) bad("split '" + name + "' samples must be >= 0");
    }
    // Held-out assets stay held out.
    if (splits.count("train") && splits.count("test")) {
      const auto& tr = splits.at("train");
      const auto& te = splits.at("test");
      for (const auto& m : te.meshes) {
        if (std::find(tr.meshes.begin(), tr.meshes.end(), m) != tr.meshes.end()) bad("mesh '" + m + "' in both train and test");
      }
      for (const auto& m : te.materials) {
        if (std::find(tr.materials.begin(), tr.materials.end(), m) != tr.materials.end()) {
          bad("material '" + m + "' in both train and test");
        }
      }
    }
  }

  json to_json() const {
    json j{{"name", name},
           {"seed", seed},
           {"resolution", resolution},
           {"fov_deg", fov_deg},
           {"object_distance", object_distance},
           {"noise_sigma", noise_sigma},
           {"max_elevation_deg", max_elevation_deg},
           {"full_rotation", full_rotation},
           {"uv_augment", uv_augment}};
    json sp = json::object();
    for (const auto& [n, s] : splits) {
      sp[n] = {{"meshes", s.meshes}, {"materials", s.materials}, {"rotations", s.rotations}, {"samples", s.samples}};
    }
    j["splits"] = sp;
    return j;
  }

  static DatasetConfig from_json(const json& j) {
    DatasetConfig c;
    try {
      for (const auto& [k, v] : j.items()) {
        if (k == "name") c.name = v.get<std::string>();
        else if (k == "seed") c.seed = v.get<std::uint64_t>();
        else if (k == "resolution") c.resolution = v.get<int>();
        else if (k == "fov_deg") c.fov_deg = v.get<double>();
        else if (k == "object_distance") c.object_distance = v.get<double>();
        else if (k == "noise_sigma") c.noise_sigma = v.get<double>();
        else if (k == "max_elevation_deg") c.max_elevation_deg = v.get<double>();
        else if (k == "full_rotation") c.full_rotation = v.get<bool>();
        else if (k == "uv_augment") c.uv_augment = v.get<bool>();
        else if (k == "splits") {
          for (const auto& [n, s] : v.items()) {
            SplitConfig sc;
            sc.meshes = s.at("meshes").get<std::vector<std::string>>();
            sc.materials = s.at("materials").get<std::vector<std::string>>();
            sc.rotations = s.value("rotations", 1);
            sc.samples = s.value("samples", 0);
            c.splits[n] = sc;
          }
        } else if (k == "fit" || k == "eval" || k.rfind("_", 0) == 0) {
          continue;  // sections read by other tools; "_comment" style keys
        } else {
          fail(ErrorCategory::kConfig, "dataset config: unknown key '" + k + "'");
        }
      }
    } catch (const json::exception& e) {
      fail(ErrorCategory::kConfig, std::string("dataset config: ") + e.what());
    }
    c.validate();
    return c;
  }

  std::uint64_t hash() const { return fnv1a(to_json().dump()); }
};

/// One planned record: which assets, which split slot, which random stream.
struct SampleSpec {
  std::string split;
  int index = 0;
  std::string id;
  int mesh_index = 0;
  int material_index = 0;
  int rotation_index = 0;
  std::uint64_t seed = 0;
};

inline std::string sample_id(const std::string& split, int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", index);
  return split + "_" + buf;
}

/// Records for one split. With `samples` = 0 this is the full cartesian
/// product (mesh-major) repeated `rotations` times. Otherwise the pairs are
/// shuffled once with the split seed and dealt round-robin, so the first
/// |pairs| records cover every pair before any repeats.
inline std::vector<SampleSpec> plan_split(const std::string& split, const SplitConfig& s, std::uint64_t seed) {
  const int nm = static_cast<int>(s.meshes.size()), nt = static_cast<int>(s.materials.size());
  std::vector<std::pair<int, int>> pairs;
  for (int m = 0; m < nm; ++m) {
    for (int t = 0; t < nt; ++t) pairs.emplace_back(m, t);
  }
  const std::uint64_t split_seed = mix_seed(seed, fnv1a(split));
  int total = static_cast<int>(pairs.size()) * s.rotations;
  if (s.samples > 0) {
    // Explicit Fisher-Yates: std::shuffle's draw pattern differs between
    // standard libraries.
    std::mt19937_64 rng(split_seed);
    for (std::size_t i = pairs.size(); i > 1; --i) std::swap(pairs[i - 1], pairs[rng() % i]);
    total = s.samples;
  }
  std::vector<SampleSpec> out;
  out.reserve(static_cast<std::size_t>(total));
  const int np = static_cast<int>(pairs.size());
  for (int k = 0; k < total; ++k) {
    const auto [m, t] = pairs[static_cast<std::size_t>(k % np)];
    out.push_back({split, k, sample_id(split, k), m, t, k / np, mix_seed(split_seed, static_cast<std::uint64_t>(k))});
  }
  return out;
}

/// The evaluation benchmark: 250 records over 6 meshes x 30 materials.
inline std::vector<SampleSpec> benchmark_plan(const std::vector<std::string>& meshes,
                                              const std::vector<std::string>& materials, std::uint64_t seed,
                                              int records = kBenchmarkRecords) {
  SplitConfig s{meshes, materials, 1, records};
  if (meshes.empty() || materials.empty()) fail(ErrorCategory::kConfig, "benchmark plan needs meshes and materials");
  return plan_split("test", s, seed);
}

struct SampleDraw {
  Quat rotation;
  render::UvTransform uv;
  std::uint64_t noise_seed = 0;
};

inline SampleDraw draw_sample(const DatasetConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  SampleDraw d;
  if (cfg.full_rotation) {
    // Shoemake's uniform quaternion.
    const double u1 = uni(rng), u2 = uni(rng), u3 = uni(rng);
    const double a = std::sqrt(1 - u1), b = std::sqrt(u1);
    d.rotation = Quat{a * std::sin(2 * kPi * u2), a * std::cos(2 * kPi * u2), b * std::sin(2 * kPi * u3),
                      b * std::cos(2 * kPi * u3)}
                     .normalized();
  } else {
    const double az = 2.0 * kPi * uni(rng);
    const double el = deg_to_rad(cfg.max_elevation_deg) * (2.0 * uni(rng) - 1.0);
    d.rotation = (Quat::from_axis_angle({1.0, 0.0, 0.0}, el) * Quat::from_axis_angle({0.0, 1.0, 0.0}, az)).normalized();
  }
  if (cfg.uv_augment) {
    d.uv.scale = 0.75 + 0.75 * uni(rng);
    d.uv.offset_u = uni(rng);
    d.uv.offset_v = uni(rng);
  }
  d.noise_seed = splitmix64(seed ^ 0x6e6f697365ULL);
  return d;
}

/// Values exactly as a reader of the PNG16 file would decode them.
template <int C>
Image<double, C> quantized(const Image<double, C>& img, const io::Png16Encoding& e) {
  Image<double, C> out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (int c = 0; c < C; ++c) out[i][c] = io::decode16(io::encode16(img[i][c], e), e);
  }
  return out;
}

inline double peak_of(std::initializer_list<const RadianceImage*> imgs) {
  double p = 0.0;
  for (const auto* img : imgs) {
    for (const auto& px : img->pixels()) p = std::max({p, px[0], px[1], px[2]});
  }
  return p > 0.0 ? p : 1.0;
}

/// Stokes cue file: R, G = (u + 1) / 2, B = 1 on valid pixels (0 elsewhere).
inline Image<double, 3> encode_stokes_cue(const NormalizedStokesMap& m) {
  Image<double, 3> out(m.width(), m.height(), -1.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (m.valid[i][0]) out[i] = {m.u[i][0], m.u[i][1], 1.0};
  }
  return out;
}

inline NormalizedStokesMap decode_stokes_cue(const Image<double, 3>& img) {
  NormalizedStokesMap m(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (img[i][2] > 0.0) {
      m.u[i] = {img[i][0], img[i][1]};
      m.valid[i][0] = 1;
    }
  }
  return m;
}

struct SampleAssets {
  const render::Mesh* mesh;
  const render::TextureSet* material;
  std::string mesh_entry;
  std::string material_entry;
};

/// Renders `scene` and writes a sample directory. `rec` carries the
/// descriptive fields (id, assets, pose); camera, flash, coverage, files and
/// encodings are added and the result is written to meta.json last. The
/// cues are computed from the quantized captures, exactly as a reader of the
/// files would compute them. Throws kInput when the object misses the frame.
inline json write_sample(const render::Scene& scene, double noise_sigma, std::uint64_t noise_seed,
                         const std::string& dir, json rec) {
  namespace fs = std::filesystem;
  const render::RenderResult r = render::render_capture(scene);
  const std::size_t coverage = count(r.gbuffer.mask);
  if (coverage == 0) fail(ErrorCategory::kInput, "sample " + rec.value("id", dir) + ": object not visible");

  fs::create_directories(dir);
  const auto path = [&](const std::string& stem) { return (fs::path(dir) / (stem + ".png")).string(); };
  json enc;

  // One exposure for the four polarizer images, as a camera would use.
  const io::Png16Encoding cap_enc{peak_of({&r.capture.i0, &r.capture.i45, &r.capture.i90, &r.i135}), 0.0, false};
  const RadianceImage* pol[4] = {&r.capture.i0, &r.capture.i45, &r.capture.i90, &r.i135};
  for (int k = 0; k < 4; ++k) {
    io::write_png16(path(kPolarizedStems[k]), *pol[k], cap_enc);
    enc[kPolarizedStems[k]] = io::to_json(cap_enc);
  }
  CaptureSet q{quantized(r.capture.i0, cap_enc), quantized(r.capture.i45, cap_enc), quantized(r.capture.i90, cap_enc)};
  const DerivedInputs derived = derive_inputs(q);
  const io::Png16Encoding full_enc = io::auto_encoding(derived.full);
  io::write_png16(path("full"), derived.full, full_enc);
  enc["full"] = io::to_json(full_enc);

  const StokesImage s = compute_stokes(q);
  const NormalizedStokesMap clean = normalize_stokes(s);
  const NormalizedStokesMap noisy = add_stokes_noise(clean, noise_sigma, noise_seed);
  io::write_png16(path("stokes_norm"), encode_stokes_cue(noisy), io::kNormalEncoding);
  enc["stokes_norm"] = io::to_json(io::kNormalEncoding);
  io::write_png8(path("stokes_vis"), visualize_stokes(noisy));
  const DiffuseColorMap dc = diffuse_color(s);
  io::write_png16(path("diffuse_cue"), dc.color, io::kUnitEncoding);
  enc["diffuse_cue"] = io::to_json(io::kUnitEncoding);

  const json gt_enc = io::write_maps(dir, r.gt, "gt_");
  for (const auto& [k, v] : gt_enc.items()) enc[k] = v;

  const std::string rel = rec.value("dir", ".");
  json files = json::object();
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".png") files[e.path().stem().string()] = rel + "/" + e.path().filename().string();
  }
  rec["camera"] = {{"fov_deg", scene.camera.fov_deg}, {"width", scene.camera.width}, {"height", scene.camera.height}};
  rec["flash"] = {r.flash.intensity.x, r.flash.intensity.y, r.flash.intensity.z};
  rec["noise_sigma"] = noise_sigma;
  rec["coverage"] = coverage;
  rec["files"] = files;
  rec["encodings"] = enc;
  io::write_json((fs::path(dir) / "meta.json").string(), rec);
  return rec;
}

/// Draws the pose and UV augmentation for `spec` and writes the sample.
inline json generate_sample(const SampleSpec& spec, const SampleAssets& assets, const DatasetConfig& cfg,
                            const std::string& dir, const std::string& rel_dir) {
  const SampleDraw draw = draw_sample(cfg, spec.seed);
  render::Scene scene;
  scene.mesh = *assets.mesh;
  scene.rotation = draw.rotation;
  scene.translation = {0.0, 0.0, -cfg.object_distance};
  scene.camera.fov_deg = cfg.fov_deg;
  scene.camera.width = scene.camera.height = cfg.resolution;
  scene.material = *assets.material;
  scene.uv = draw.uv;
  const auto q4 = draw.rotation.as_array();
  json rec{{"id", spec.id},
           {"split", spec.split},
           {"index", spec.index},
           {"seed", spec.seed},
           {"dir", rel_dir},
           {"mesh", {{"index", spec.mesh_index}, {"entry", assets.mesh_entry}}},
           {"material", {{"index", spec.material_index}, {"entry", assets.material_entry}}},
           {"rotation_index", spec.rotation_index},
           {"rotation", {q4[0], q4[1], q4[2], q4[3]}},
           {"uv", {{"scale", draw.uv.scale}, {"offset_u", draw.uv.offset_u}, {"offset_v", draw.uv.offset_v}}},
           {"object_distance", cfg.object_distance},
           {"config_hash", hex64(cfg.hash())}};
  return write_sample(scene, cfg.noise_sigma, draw.noise_seed, dir, std::move(rec));
}

struct GenerateOptions {
  int max_new_samples = -1;  // stop after generating this many (simulates an interrupted run)
};

struct GenerateSummary {
  int planned = 0;
  int written = 0;  // generated in this run
  int reused = 0;   // already complete from an earlier run
  std::vector<std::pair<std::string, std::string>> rejected;  // (id, reason)
  std::vector<std::pair<std::string, std::string>> skipped_assets;
  bool complete = false;
  std::string manifest;
};

inline json manifest_header(const DatasetConfig& cfg) {
  return {{"type", "header"},
          {"format", "polarcap-manifest"},
          {"version", kManifestVersion},
          {"config_hash", hex64(cfg.hash())},
          {"config", cfg.to_json()}};
}

/// Generates every planned sample under `root` and writes manifest.ndjson:
/// a header, one record per sample in plan order, then a summary. Samples
/// whose meta.json already carries this config's hash are reused, so an
/// interrupted run resumes to the same bytes as an uninterrupted one.
inline GenerateSummary generate_dataset(const DatasetConfig& cfg, const std::string& root,
                                        const GenerateOptions& opt = {}) {
  namespace fs = std::filesystem;
  cfg.validate();
  fs::create_directories(root);
  const std::string hash = hex64(cfg.hash());
  GenerateSummary sum;

  std::map<std::string, render::Mesh> meshes;
  std::map<std::string, render::TextureSet> materials;
  std::set<std::string> bad_assets;
  const auto load_assets = [&](const SplitConfig& s) {
    for (const auto& e : s.meshes) {
      if (meshes.count(e) || bad_assets.count(e)) continue;
      try {
        render::Mesh m = render::load_mesh_entry(e);
        render::normalize_to_unit_sphere(m);
        meshes.emplace(e, std::move(m));
      } catch (const Error& err) {
        log::warn("skipping mesh '" + e + "': " + err.what());
        bad_assets.insert(e);
        sum.skipped_assets.emplace_back(e, err.what());
      }
    }
    for (const auto& e : s.materials) {
      if (materials.count(e) || bad_assets.count(e)) continue;
      try {
        materials.emplace(e, render::load_material_entry(e));
      } catch (const Error& err) {
        log::warn("skipping material '" + e + "': " + err.what());
        bad_assets.insert(e);
        sum.skipped_assets.emplace_back(e, err.what());
      }
    }
  };

  std::vector<json> records;
  bool stopped = false;
  for (const auto& [split, s] : cfg.splits) {
    load_assets(s);
    for (const SampleSpec& spec : plan_split(split, s, cfg.seed)) {
      ++sum.planned;
      if (stopped) continue;
      const std::string& me = s.meshes[static_cast<std::size_t>(spec.mesh_index)];
      const std::string& ma = s.materials[static_cast<std::size_t>(spec.material_index)];
      if (bad_assets.count(me) || bad_assets.count(ma)) {
        sum.rejected.emplace_back(spec.id, "asset failed to load");
        continue;
      }
      const std::string rel = split + "/" + spec.id;
      const fs::path dir = fs::path(root) / rel;
      const fs::path meta = dir / "meta.json";
      if (fs::exists(meta)) {
        try {
          json rec = io::read_json(meta.string());
          if (rec.value("config_hash", "") == hash) {
            records.push_back(std::move(rec));
            ++sum.reused;
            continue;
          }
        } catch (const Error&) {
          // unreadable leftovers are regenerated
        }
      }
      if (opt.max_new_samples >= 0 && sum.written >= opt.max_new_samples) {
        stopped = true;
        continue;
      }
      if (fs::exists(dir)) fs::remove_all(dir);
      try {
        records.push_back(generate_sample(spec, {&meshes.at(me), &materials.at(ma), me, ma}, cfg, dir.string(), rel));
        ++sum.written;
        log::info("generated " + spec.id);
      } catch (const Error& err) {
        if (err.category() != ErrorCategory::kInput) throw;
        sum.rejected.emplace_back(spec.id, err.what());
        log::warn(std::string("rejected ") + err.what());
      }
    }
  }
  sum.complete = !stopped;

  sum.manifest = (fs::path(root) / "manifest.ndjson").string();
  const std::string tmp = sum.manifest + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCategory::kIo, "cannot write manifest '" + tmp + "'");
    out << manifest_header(cfg).dump() << '\n';
    for (json rec : records) {
      rec["type"] = "sample";
      out << rec.dump() << '\n';
    }
    json rej = json::array(), skipped = json::array();
    for (const auto& [id, why] : sum.rejected) rej.push_back({{"id", id}, {"reason", why}});
    for (const auto& [e, why] : sum.skipped_assets) skipped.push_back({{"asset", e}, {"reason", why}});
    out << json{{"type", "summary"},       {"planned", sum.planned}, {"samples", records.size()},
                {"complete", sum.complete}, {"rejected", rej},        {"skipped_assets", skipped}}
               .dump()
        << '\n';
    if (!out) fail(ErrorCategory::kIo, "failed to write manifest");
  }
  fs::rename(tmp, sum.manifest);
  return sum;
}

struct Manifest {
  json header;
  std::vector<json> samples;
  json summary;
  std::string root;  // directory holding the manifest; record paths are relative to it
};

inline Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::kIo, "cannot open manifest '" + path + "'");
  Manifest m;
  m.root = std::filesystem::path(path).parent_path().string();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorCategory::kParse, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const std::string type = j.value("type", "");
    if (type == "header") {
      if (j.value("version", 0) != kManifestVersion) fail(ErrorCategory::kParse, path + ": unsupported manifest version");
      m.header = std::move(j);
    } else if (type == "sample") {
      m.samples.push_back(std::move(j));
    } else if (type == "summary") {
      m.summary = std::move(j);
    } else {
      fail(ErrorCategory::kParse, path + ":" + std::to_string(line_no) + ": unknown record type");
    }
  }
  if (m.header.is_null()) fail(ErrorCategory::kParse, path + ": missing header record");
  return m;
}

/// A sample decoded from disk.
struct Sample {
  json record;
  std::string dir;
  CaptureSet capture;
  RadianceImage i135;
  RadianceImage full;
  NormalizedStokesMap stokes_cue;
  DiffuseColorMap diffuse_cue;
  SvbrdfMaps gt;
  render::Camera camera;
  render::FlashLight flash;

  const Mask& mask() const { return gt.mask; }

  /// Fit inputs with the stored cues; the G-buffer depth is included as the
  /// fixed geometry unless `with_depth` is false.
  inverse::FitInputs fit_inputs(bool with_depth = true) const {
    inverse::FitInputs in;
    in.capture = capture;
    in.setup.camera = camera;
    in.setup.flash = flash;
    in.mask = gt.mask;
    in.stokes_cue = stokes_cue;
    in.diffuse_cue = diffuse_cue;
    if (with_depth) in.depth = gt.depth;
    return in;
  }
};

inline Sample load_sample(const std::string& dir) {
  namespace fs = std::filesystem;
  Sample s;
  s.dir = dir;
  s.record = io::read_json((fs::path(dir) / "meta.json").string());
  const json& enc = s.record.at("encodings");
  try {
    const json& cam = s.record.at("camera");
    s.camera.fov_deg = cam.at("fov_deg").get<double>();
    s.camera.width = cam.at("width").get<int>();
    s.camera.height = cam.at("height").get<int>();
    const auto f = s.record.at("flash").get<std::vector<double>>();
    if (f.size() != 3) fail(ErrorCategory::kParse, dir + ": flash must have 3 components");
    s.flash.intensity = {f[0], f[1], f[2]};
  } catch (const json::exception& e) {
    fail(ErrorCategory::kParse, dir + "/meta.json: " + e.what());
  }
  const int w = s.camera.width, h = s.camera.height;
  const auto read = [&](const std::string& stem) {
    if (!enc.contains(stem)) fail(ErrorCategory::kParse, dir + ": no encoding for " + stem);
    return io::read_png_as<3>((fs::path(dir) / (stem + ".png")).string(), io::encoding_from(enc.at(stem), stem), w, h);
  };
  s.capture = {read("i000"), read("i045"), read("i090")};
  s.i135 = read("i135");
  s.full = read("full");
  s.stokes_cue = decode_stokes_cue(read("stokes_norm"));
  s.diffuse_cue.color = read("diffuse_cue");
  s.diffuse_cue.valid = Mask(w, h);
  for (std::size_t i = 0; i < s.diffuse_cue.valid.size(); ++i) {
    const auto& c = s.diffuse_cue.color[i];
    s.diffuse_cue.valid[i][0] = std::max({c[0], c[1], c[2]}) > 0.0;
  }
  s.gt = io::read_maps(dir, enc, "gt_");
  require_same_size(s.gt.mask, s.capture.i0, "sample mask");
  return s;
}

inline std::string sample_dir(const Manifest& m, const json& rec) {
  return (std::filesystem::path(m.root) / rec.at("dir").get<std::string>()).string();
}

/// Copies a sample's ground truth into a map set directory (the layout a
/// predictor writes). Files are copied, not re-encoded, so evaluating the
/// copy against the sample is exact.
inline void export_gt_map_set(const std::string& sample, const std::string& out) {
  namespace fs = std::filesystem;
  const json rec = io::read_json((fs::path(sample) / "meta.json").string());
  fs::create_directories(out);
  json enc;
  for (const char* stem : io::kMapStems) {
    const std::string gt = std::string("gt_") + stem;
    if (!rec.at("encodings").contains(gt)) fail(ErrorCategory::kParse, sample + ": no encoding for " + gt);
    fs::copy_file(fs::path(sample) / (gt + ".png"), fs::path(out) / (std::string(stem) + ".png"),
                  fs::copy_options::overwrite_existing);
    enc[stem] = rec["encodings"][gt];
  }
  fs::copy_file(fs::path(sample) / "mask.png", fs::path(out) / "mask.png", fs::copy_options::overwrite_existing);
  io::write_json((fs::path(out) / "maps.json").string(),
                 {{"encodings", enc}, {"meta", {{"source", "ground-truth"}, {"id", rec.value("id", "")}}}});
}

}  // namespace polarcap::dataset
