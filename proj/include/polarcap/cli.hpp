// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// The `polarcap` command line: render, gen-dataset, cues, fit, eval, ablate,
// viz and selftest. Failures print one JSON object on stderr and exit with a
// code per error category (see exit_code).

#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "polarcap/core/error.hpp"
#include "polarcap/core/log.hpp"
#include "polarcap/core/parallel.hpp"
#include "polarcap/dataset.hpp"
#include "polarcap/eval.hpp"
#include "polarcap/inverse/fit.hpp"
#include "polarcap/io/maps.hpp"
#include "polarcap/io/png.hpp"
#include "polarcap/selftest.hpp"

namespace polarcap::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,  // unexpected error, or a failed self-test
  kUsageError = 2,
  kIoError = 3,
  kConfigError = 4,
  kInputError = 5,
  kDivergenceError = 6,
};

constexpr int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kUsage: return kUsageError;
    case ErrorCategory::kIo: return kIoError;
    case ErrorCategory::kConfig: return kConfigError;
    case ErrorCategory::kInput:
    case ErrorCategory::kParse:
    case ErrorCategory::kDomain:
    case ErrorCategory::kUnphysical: return kInputError;
    case ErrorCategory::kDivergence: return kDivergenceError;
  }
  return kFailure;
}

inline int report_error(std::string_view category, const std::string& message, int code) {
  std::cerr << json{{"error", {{"category", category}, {"message", message}, {"exit_code", code}}}}.dump() << '\n';
  return code;
}

// ---- Config helpers -------------------------------------------------------

inline json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  if (!fs::exists(path)) fail(ErrorCategory::kIo, "config file '" + path + "' not found");
  try {
    return io::read_json(path);
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::kParse) fail(ErrorCategory::kConfig, e.what());
    throw;
  }
}

inline inverse::FitConfig fit_config_from(const json& j) {
  inverse::FitConfig c;
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "iterations") c.iterations = v.get<int>();
      else if (k == "step") c.step = v.get<double>();
      else if (k == "final_step") c.final_step = v.get<double>();
      else if (k == "beta1") c.beta1 = v.get<double>();
      else if (k == "beta2") c.beta2 = v.get<double>();
      else if (k == "adam_eps") c.adam_eps = v.get<double>();
      else if (k == "tv_weight") c.tv_weight = v.get<double>();
      else if (k == "tv_specular_weight") c.tv_specular_weight = v.get<double>();
      else if (k == "gray_specular") c.gray_specular = v.get<bool>();
      else if (k == "max_zenith_deg") c.max_zenith_deg = v.get<double>();
      else if (k == "working_depth") c.working_depth = v.get<double>();
      else if (k == "divergence_window") c.divergence_window = v.get<int>();
      else if (k == "tolerance") c.tolerance = v.get<double>();
      else if (k == "patience") c.patience = v.get<int>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "mode") c.mode = inverse::fit_mode_from(v.get<std::string>());
      else if (k == "ior") c.ior = v.get<double>();
      else fail(ErrorCategory::kConfig, "fit config: unknown key '" + k + "'");
    }
  } catch (const json::exception& e) {
    fail(ErrorCategory::kConfig, std::string("fit config: ") + e.what());
  }
  return c;
}

inline json section(const json& cfg, const char* name) {
  return cfg.contains(name) ? cfg.at(name) : json::object();
}

inline void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) fail(ErrorCategory::kIo, what + " '" + path + "' not found");
}

inline void require_dir(const std::string& path, const std::string& what) {
  if (!fs::is_directory(path)) fail(ErrorCategory::kIo, what + " '" + path + "' not found");
}

inline void prepare_out_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path)) fail(ErrorCategory::kIo, "cannot create output directory '" + path + "'");
}

inline json report_json(const inverse::FitReport& r, const inverse::FitConfig& cfg) {
  const auto& t = r.final_terms;
  return {{"config_hash", r.config_hash},
          {"config", cfg.canonical()},
          {"mode", std::string(inverse::to_string(cfg.mode))},
          {"initial_loss", r.initial_loss},
          {"best_loss", r.best_loss},
          {"best_iteration", r.best_iteration},
          {"iterations_run", r.iterations_run},
          {"stop_reason", r.stop_reason},
          {"seconds", r.seconds},
          {"tv_term", r.tv_term},
          {"final_terms",
           {{"total", t.total},
            {"polarized_render_term", t.polarized_render_term},
            {"plain_render_term", t.plain_render_term},
            {"l1_map_term", t.l1_map_term},
            {"per_angle", t.per_angle}}},
          {"loss_curve", r.loss_curve}};
}

// ---- Subcommands ---------------------------------------------------------

struct RenderArgs {
  std::string scene;
  std::string out;
  std::optional<std::uint64_t> seed;
};

/// Scene file keys: mesh, material (catalog entries), resolution, fov_deg,
/// distance, rotation [w,x,y,z] or azimuth_deg/elevation_deg, uv {scale,
/// offset_u, offset_v}, noise_sigma, seed.
inline int cmd_render(const RenderArgs& a) {
  require_file(a.scene, "scene file");
  const json j = read_config(a.scene);
  prepare_out_dir(a.out);
  render::Scene scene;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string mesh_entry, material_entry;
  try {
    mesh_entry = j.at("mesh").get<std::string>();
    material_entry = j.at("material").get<std::string>();
    scene.camera.width = scene.camera.height = j.value("resolution", 512);
    scene.camera.fov_deg = j.value("fov_deg", 40.0);
    scene.translation = {0.0, 0.0, -j.value("distance", 3.0)};
    if (j.contains("rotation")) {
      const auto q = j.at("rotation").get<std::vector<double>>();
      if (q.size() != 4) fail(ErrorCategory::kConfig, "scene rotation must be [w, x, y, z]");
      scene.rotation = Quat{q[0], q[1], q[2], q[3]}.normalized();
    } else {
      scene.rotation = (Quat::from_axis_angle({1, 0, 0}, deg_to_rad(j.value("elevation_deg", 0.0))) *
                        Quat::from_axis_angle({0, 1, 0}, deg_to_rad(j.value("azimuth_deg", 0.0))))
                           .normalized();
    }
    if (j.contains("uv")) {
      scene.uv.scale = j["uv"].value("scale", 1.0);
      scene.uv.offset_u = j["uv"].value("offset_u", 0.0);
      scene.uv.offset_v = j["uv"].value("offset_v", 0.0);
    }
    sigma = j.value("noise_sigma", 0.0);
    seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    fail(ErrorCategory::kConfig, std::string("scene file: ") + e.what());
  }
  if (a.seed) seed = *a.seed;
  scene.mesh = render::load_mesh_entry(mesh_entry);
  render::normalize_to_unit_sphere(scene.mesh);
  scene.material = render::load_material_entry(material_entry);
  const auto q4 = scene.rotation.as_array();
  json rec{{"id", fs::path(a.out).filename().string()},
           {"dir", "."},
           {"mesh", {{"entry", mesh_entry}}},
           {"material", {{"entry", material_entry}}},
           {"rotation", {q4[0], q4[1], q4[2], q4[3]}},
           {"object_distance", -scene.translation.z}};
  const json out = dataset::write_sample(scene, sigma, splitmix64(seed), a.out, rec);
  std::cout << json{{"out", a.out}, {"coverage", out["coverage"]}}.dump() << '\n';
  return kOk;
}

struct GenArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int max_new = -1;
  bool plan_only = false;
};

inline int cmd_gen_dataset(const GenArgs& a) {
  require_file(a.config, "config file");
  dataset::DatasetConfig cfg = dataset::DatasetConfig::from_json(read_config(a.config));
  if (a.seed) cfg.seed = *a.seed;
  prepare_out_dir(a.out);
  if (a.plan_only) {
    std::ostringstream s;
    s << dataset::manifest_header(cfg).dump() << '\n';
    int n = 0;
    for (const auto& [split, sc] : cfg.splits) {
      for (const auto& p : dataset::plan_split(split, sc, cfg.seed)) {
        s << json{{"type", "plan"},
                  {"id", p.id},
                  {"split", p.split},
                  {"mesh", sc.meshes[static_cast<std::size_t>(p.mesh_index)]},
                  {"material", sc.materials[static_cast<std::size_t>(p.material_index)]},
                  {"rotation_index", p.rotation_index},
                  {"seed", p.seed}}
                 .dump()
          << '\n';
        ++n;
      }
    }
    eval::write_text((fs::path(a.out) / "plan.ndjson").string(), s.str());
    std::cout << json{{"plan", (fs::path(a.out) / "plan.ndjson").string()}, {"records", n}}.dump() << '\n';
    return kOk;
  }
  dataset::GenerateOptions opt;
  opt.max_new_samples = a.max_new;
  const auto sum = dataset::generate_dataset(cfg, a.out, opt);
  std::cout << json{{"manifest", sum.manifest},
                    {"planned", sum.planned},
                    {"written", sum.written},
                    {"reused", sum.reused},
                    {"rejected", sum.rejected.size()},
                    {"complete", sum.complete},
                    {"config_hash", hex64(cfg.hash())}}
                   .dump()
            << '\n';
  return kOk;
}

struct CuesArgs {
  std::string in;
  std::string out;
  double scale = 1.0;
  double noise_sigma = 0.0;
  std::optional<std::uint64_t> seed;
};

/// Reads i000/i045/i090.png from a capture directory. Encodings come from
/// meta.json when present, else every file uses `scale`. Pixels at the
/// PNG ceiling are treated as saturated.
inline int cmd_cues(const CuesArgs& a) {
  require_dir(a.in, "capture directory");
  for (const char* stem : {"i000", "i045", "i090"}) require_file((fs::path(a.in) / (std::string(stem) + ".png")).string(), "capture image");
  prepare_out_dir(a.out);
  json enc = json::object();
  if (fs::exists(fs::path(a.in) / "meta.json")) enc = io::read_json((fs::path(a.in) / "meta.json").string()).value("encodings", json::object());
  Mask saturated;
  const auto read = [&](const char* stem) {
    const io::Png16Encoding e = enc.contains(stem) ? io::encoding_from(enc[stem], stem) : io::Png16Encoding{a.scale, 0.0, false};
    Mask at_max;
    RadianceImage img = io::read_png_as<3>((fs::path(a.in) / (std::string(stem) + ".png")).string(), e, -1, -1, &at_max);
    if (saturated.empty()) saturated = Mask(img.width(), img.height());
    require_same_size(saturated, img, "capture images");
    for (std::size_t i = 0; i < at_max.size(); ++i) saturated[i][0] |= at_max[i][0];
    return img;
  };
  CaptureSet c{read("i000"), read("i045"), read("i090")};
  const StokesImage s = compute_stokes(c);
  NormalizedStokesMap m = normalize_stokes(s);
  for (std::size_t i = 0; i < m.valid.size(); ++i) {
    if (saturated[i][0]) m.valid[i][0] = 0, m.u[i] = {0.0, 0.0};
  }
  m = add_stokes_noise(m, a.noise_sigma, a.seed.value_or(0));
  const DiffuseColorMap dc = diffuse_color(s, &saturated);
  const auto path = [&](const char* stem) { return (fs::path(a.out) / (std::string(stem) + ".png")).string(); };
  io::write_png16(path("stokes_norm"), dataset::encode_stokes_cue(m), io::kNormalEncoding);
  io::write_png8(path("stokes_vis"), visualize_stokes(m));
  io::write_png16(path("diffuse_cue"), dc.color, io::kUnitEncoding);
  io::write_mask_png(path("diffuse_cue_valid"), dc.valid);
  io::write_json((fs::path(a.out) / "cues.json").string(),
                 {{"encodings", {{"stokes_norm", io::to_json(io::kNormalEncoding)}, {"diffuse_cue", io::to_json(io::kUnitEncoding)}}},
                  {"valid_stokes", count(m.valid)},
                  {"valid_diffuse", count(dc.valid)},
                  {"saturated", count(saturated)}});
  std::cout << json{{"out", a.out}, {"valid_stokes", count(m.valid)}, {"valid_diffuse", count(dc.valid)}}.dump() << '\n';
  return kOk;
}

struct FitArgs {
  std::string in;
  std::string manifest;
  std::string split;
  std::string out;
  std::string config;
  std::string mode;
  int iterations = 0;
  std::optional<std::uint64_t> seed;
  bool no_depth = false;
};

inline inverse::FitConfig fit_config_for(const std::string& config_path, const std::string& mode, int iterations,
                                         std::optional<std::uint64_t> seed) {
  inverse::FitConfig cfg = fit_config_from(section(read_config(config_path), "fit"));
  if (!mode.empty()) cfg.mode = inverse::fit_mode_from(mode);
  if (iterations > 0) cfg.iterations = iterations;
  if (seed) cfg.seed = *seed;
  cfg.validate();
  return cfg;
}

inline json fit_one(const std::string& sample_dir, const std::string& out, const inverse::FitConfig& cfg, bool no_depth) {
  const dataset::Sample s = dataset::load_sample(sample_dir);
  const inverse::FitResult r = inverse::fit_svbrdf(s.fit_inputs(!no_depth), cfg);
  json meta = report_json(r.report, cfg);
  meta["sample"] = s.record.value("id", sample_dir);
  meta["used_depth"] = !no_depth;
  io::write_map_set(out, r.maps, {{"sample", meta["sample"]}, {"config_hash", r.report.config_hash}});
  io::write_json((fs::path(out) / "report.json").string(), meta);
  return {{"sample", meta["sample"]},
          {"best_loss", r.report.best_loss},
          {"iterations_run", r.report.iterations_run},
          {"stop_reason", r.report.stop_reason}};
}

inline int cmd_fit(const FitArgs& a) {
  if (a.in.empty() == a.manifest.empty()) fail(ErrorCategory::kUsage, "fit needs exactly one of --in or --manifest");
  const inverse::FitConfig cfg = fit_config_for(a.config, a.mode, a.iterations, a.seed);
  if (!a.in.empty()) {
    require_dir(a.in, "sample directory");
    require_file((fs::path(a.in) / "meta.json").string(), "sample record");
    prepare_out_dir(a.out);
    std::cout << fit_one(a.in, a.out, cfg, a.no_depth).dump() << '\n';
    return kOk;
  }
  require_file(a.manifest, "manifest");
  const dataset::Manifest m = dataset::read_manifest(a.manifest);
  prepare_out_dir(a.out);
  json done = json::array();
  for (const json& rec : m.samples) {
    if (!a.split.empty() && rec.value("split", "") != a.split) continue;
    const std::string id = rec.at("id").get<std::string>();
    done.push_back(fit_one(dataset::sample_dir(m, rec), (fs::path(a.out) / id).string(), cfg, a.no_depth));
  }
  std::cout << json{{"out", a.out}, {"fitted", done.size()}, {"config_hash", cfg.hash()}}.dump() << '\n';
  return kOk;
}

struct EvalArgs {
  std::string results;
  std::string manifest;
  std::string out;
  std::string config;
  std::string split;
  std::string method;
  int n_relights = 0;
  std::optional<std::uint64_t> seed;
  bool grid = false;
};

inline eval::EvalConfig eval_config_for(const std::string& config_path, int n_relights, std::optional<std::uint64_t> seed,
                                        const std::string& method) {
  eval::EvalConfig cfg = eval::EvalConfig::from_json(section(read_config(config_path), "eval"));
  if (n_relights > 0) cfg.n_relights = n_relights;
  if (seed) cfg.seed = *seed;
  if (!method.empty()) cfg.method = method;
  cfg.validate();
  return cfg;
}

inline void write_table(const eval::MetricsTable& t, const std::string& out, const std::string& stem, json extra) {
  eval::write_text((fs::path(out) / (stem + ".csv")).string(), eval::to_csv(t));
  json j = eval::to_json(t);
  for (const auto& [k, v] : extra.items()) j[k] = v;
  io::write_json((fs::path(out) / (stem + ".json")).string(), j);
}

inline int cmd_eval(const EvalArgs& a) {
  require_dir(a.results, "results directory");
  require_file(a.manifest, "manifest");
  const eval::EvalConfig cfg = eval_config_for(a.config, a.n_relights, a.seed, a.method);
  const dataset::Manifest m = dataset::read_manifest(a.manifest);
  prepare_out_dir(a.out);
  const eval::MetricsTable t = eval::evaluate(a.results, m, cfg, a.split);
  write_table(t, a.out, "metrics",
              {{"manifest_config_hash", m.header.value("config_hash", "")},
               {"n_relights", cfg.n_relights},
               {"seed", cfg.seed}});
  if (a.grid) {
    std::vector<Rgb8Image> rows;
    for (const auto& r : t.rows) {
      if (!r.ok) continue;
      for (const json& rec : m.samples) {
        if (rec.value("id", "") != r.id) continue;
        const dataset::Sample s = dataset::load_sample(dataset::sample_dir(m, rec));
        rows.push_back(eval::comparison_row(s, io::read_map_set((fs::path(a.results) / r.id).string()), cfg));
      }
    }
    if (!rows.empty()) io::write_png8((fs::path(a.out) / "grid.png").string(), eval::vstack(rows));
  }
  json summary{{"rows", t.rows.size()}, {"evaluated", t.evaluated}, {"flagged", t.flagged}};
  for (const auto& [method, metrics] : t.aggregate) {
    for (const auto& [k, st] : metrics) summary["mean"][method][k] = st.mean;
  }
  std::cout << summary.dump() << '\n';
  return kOk;
}

struct AblateArgs {
  std::string manifest;
  std::string out;
  std::string config;
  std::string split;
  std::vector<std::string> modes;
  int limit = 0;
  int iterations = 0;
  std::optional<std::uint64_t> seed;
};

inline int cmd_ablate(const AblateArgs& a) {
  require_file(a.manifest, "manifest");
  const inverse::FitConfig fcfg = fit_config_for(a.config, "", a.iterations, a.seed);
  const eval::EvalConfig ecfg = eval_config_for(a.config, 0, a.seed, "");
  std::vector<inverse::FitMode> modes;
  for (const auto& m : a.modes) modes.push_back(inverse::fit_mode_from(m));
  if (modes.empty()) modes = eval::default_ablation_modes();
  const dataset::Manifest m = dataset::read_manifest(a.manifest);
  prepare_out_dir(a.out);
  std::vector<eval::AblationSample> samples;
  for (const json& rec : m.samples) {
    if (!a.split.empty() && rec.value("split", "") != a.split) continue;
    if (a.limit > 0 && static_cast<int>(samples.size()) >= a.limit) break;
    dataset::Sample s = dataset::load_sample(dataset::sample_dir(m, rec));
    samples.push_back({rec.at("id").get<std::string>(), s.fit_inputs(), s.gt, s.camera, s.flash.intensity});
  }
  const eval::MetricsTable t = eval::ablation_suite(samples, modes, fcfg, ecfg);
  write_table(t, a.out, "ablation", {{"fit_config_hash", fcfg.hash()}});
  json summary{{"rows", t.rows.size()}};
  for (const auto& [method, metrics] : t.aggregate) summary["mean_l1_normal"][method] = metrics.at("l1_normal").mean;
  std::cout << summary.dump() << '\n';
  return kOk;
}

struct VizArgs {
  std::string stokes;
  std::string normal;
  std::string depth;
  std::string mask;
  std::string out;
  double depth_scale = 1.0;
};

inline int cmd_viz(const VizArgs& a) {
  const int given = !a.stokes.empty() + !a.normal.empty() + !a.depth.empty();
  if (given != 1) fail(ErrorCategory::kUsage, "viz needs exactly one of --stokes, --normal, --depth");
  const std::string in = !a.stokes.empty() ? a.stokes : (!a.normal.empty() ? a.normal : a.depth);
  require_file(in, "input map");
  if (!a.mask.empty()) require_file(a.mask, "mask");
  const fs::path parent = fs::path(a.out).parent_path();
  if (!parent.empty()) prepare_out_dir(parent.string());
  const io::PngData raw = io::read_png(in);
  Mask mask(raw.width, raw.height);
  if (!a.mask.empty()) {
    mask = io::read_mask_png(a.mask);
    if (mask.width() != raw.width || mask.height() != raw.height) fail(ErrorCategory::kInput, "mask size differs from map");
  } else {
    for (std::size_t i = 0; i < mask.size(); ++i) {
      for (int c = 0; c < raw.channels; ++c) mask[i][0] |= raw.samples[i * raw.channels + c] != 0;
    }
  }
  Rgb8Image img;
  if (!a.stokes.empty()) {
    if (raw.channels < 3) fail(ErrorCategory::kInput, "stokes map must be an RGB PNG");
    NormalizedStokesMap m = dataset::decode_stokes_cue(io::read_png_as<3>(in, io::kNormalEncoding));
    for (std::size_t i = 0; i < mask.size(); ++i) m.valid[i][0] &= mask[i][0];
    img = visualize_stokes(m);
  } else if (!a.normal.empty()) {
    img = eval::visualize_normals(io::read_png_as<3>(in, io::kNormalEncoding), mask);
  } else {
    img = eval::visualize_depth(io::read_png_as<1>(in, {a.depth_scale, 0.0, false}), mask);
  }
  io::write_png8(a.out, img);
  std::cout << json{{"out", a.out}, {"width", img.width()}, {"height", img.height()}}.dump() << '\n';
  return kOk;
}

struct LossArgs {
  std::string sample;
  std::string pred;
  double map_weight = 0.0;
};

/// Loss of a map set against a dataset sample's decoded captures: the
/// reference value for independent implementations of the same loss.
inline int cmd_loss(const LossArgs& a) {
  require_dir(a.sample, "sample");
  require_dir(a.pred, "prediction");
  const dataset::Sample s = dataset::load_sample(a.sample);
  const SvbrdfMaps pred = io::read_map_set(a.pred);
  require_same_size(pred.mask, s.gt.mask, "prediction/sample");
  Mask mask(s.gt.mask.width(), s.gt.mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i][0] = s.gt.mask[i][0] && pred.mask[i][0];
  inverse::ShadingSetup setup{s.camera, s.flash, brdf::kDefaultIor};
  inverse::LossOptions opt;
  opt.map_weight = a.map_weight;
  if (a.map_weight > 0.0) opt.gt = &s.gt;
  const auto obs = inverse::Observation::from_capture(s.capture);
  const inverse::LossBreakdown pol = inverse::polarized_render_loss(pred, obs, setup, mask, opt);
  opt.render = inverse::RenderLoss::kPlain;
  const inverse::LossBreakdown plain = inverse::polarized_render_loss(pred, obs, setup, mask, opt);
  std::cout << json{{"sample", s.record.value("id", a.sample)},
                    {"pixels", count(mask)},
                    {"polarized_render_term", pol.polarized_render_term},
                    {"per_angle", pol.per_angle},
                    {"plain_render_term", plain.plain_render_term},
                    {"l1_map_term", pol.l1_map_term},
                    {"map_weight", a.map_weight},
                    {"total", pol.total}}
                   .dump()
            << '\n';
  return kOk;
}

inline int cmd_selftest() {
  bool ok = true;
  for (const auto& r : selftest::run_all()) {
    std::printf("%s %-26s %s (%.2fs)\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str(), r.seconds);
    ok = ok && r.pass;
  }
  return ok ? kOk : kFailure;
}

// ---- Entry point ---------------------------------------------------------

inline int run(int argc, char** argv) {
  CLI::App app{"polarcap: polarization capture simulation, cue extraction and SVBRDF recovery"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  int verbose = 0;
  bool quiet = false;
  app.add_option("--threads", threads, "Worker thread cap (0: POLARCAP_THREADS or all cores)")->check(CLI::NonNegativeNumber);
  app.add_flag("-v,--verbose", verbose, "More logging (repeatable)");
  app.add_flag("-q,--quiet", quiet, "Errors only");

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Render a scene file into a capture directory");
  render->add_option("--scene", ra.scene, "Scene JSON")->required();
  render->add_option("--out", ra.out, "Output directory")->required();
  render->add_option("--seed", ra.seed, "Noise seed override");

  GenArgs ga;
  auto* gen = app.add_subcommand("gen-dataset", "Generate a dataset and its manifest from a config");
  gen->add_option("--config", ga.config, "Dataset config JSON")->required();
  gen->add_option("--out", ga.out, "Dataset root")->required();
  gen->add_option("--seed", ga.seed, "Master seed override");
  gen->add_option("--max-new-samples", ga.max_new, "Stop after this many new samples (resume later)");
  gen->add_flag("--plan-only", ga.plan_only, "Write plan.ndjson without rendering");

  CuesArgs ca;
  auto* cues = app.add_subcommand("cues", "Extract Stokes and diffuse-color cues from a capture directory");
  cues->add_option("--in", ca.in, "Capture directory with i000/i045/i090.png")->required();
  cues->add_option("--out", ca.out, "Output directory")->required();
  cues->add_option("--scale", ca.scale, "PNG16 scale when no meta.json is present")->check(CLI::PositiveNumber);
  cues->add_option("--noise-sigma", ca.noise_sigma, "Gaussian noise on the normalized Stokes map")->check(CLI::NonNegativeNumber);
  cues->add_option("--seed", ca.seed, "Noise seed");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Recover the five maps from a sample or every sample of a manifest");
  fit->add_option("--in", fa.in, "Sample directory");
  fit->add_option("--manifest", fa.manifest, "Dataset manifest (results go to <out>/<id>)");
  fit->add_option("--split", fa.split, "Only this split");
  fit->add_option("--out", fa.out, "Output directory")->required();
  fit->add_option("--config", fa.config, "Config JSON (\"fit\" section)");
  fit->add_option("--mode", fa.mode, "full | no-polarized-loss | no-polarization");
  fit->add_option("--iterations", fa.iterations, "Iteration budget override")->check(CLI::PositiveNumber);
  fit->add_option("--seed", fa.seed, "Seed override");
  fit->add_flag("--no-depth", fa.no_depth, "Ignore the stored depth; fit against a working plane");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Score results against a manifest's ground truth");
  ev->add_option("--results", ea.results, "Results root with one map set per sample id")->required();
  ev->add_option("--manifest", ea.manifest, "Dataset manifest")->required();
  ev->add_option("--out", ea.out, "Output directory for metrics.csv/json")->required();
  ev->add_option("--config", ea.config, "Config JSON (\"eval\" section)");
  ev->add_option("--split", ea.split, "Only this split");
  ev->add_option("--method", ea.method, "Method tag");
  ev->add_option("--n-relights", ea.n_relights, "Relights per sample")->check(CLI::PositiveNumber);
  ev->add_option("--seed", ea.seed, "Relight seed");
  ev->add_flag("--grid", ea.grid, "Also write grid.png");

  AblateArgs aa;
  auto* ab = app.add_subcommand("ablate", "Fit and score samples under each fit mode");
  ab->add_option("--manifest", aa.manifest, "Dataset manifest")->required();
  ab->add_option("--out", aa.out, "Output directory")->required();
  ab->add_option("--config", aa.config, "Config JSON (\"fit\" and \"eval\" sections)");
  ab->add_option("--split", aa.split, "Only this split");
  ab->add_option("--modes", aa.modes, "Fit modes (full is always included)");
  ab->add_option("--limit", aa.limit, "At most this many samples")->check(CLI::PositiveNumber);
  ab->add_option("--iterations", aa.iterations, "Iteration budget override")->check(CLI::PositiveNumber);
  ab->add_option("--seed", aa.seed, "Seed override");

  VizArgs va;
  auto* viz = app.add_subcommand("viz", "8-bit visualization of a Stokes, normal or depth PNG16 map");
  viz->add_option("--stokes", va.stokes, "stokes_norm.png");
  viz->add_option("--normal", va.normal, "Normal map PNG16 ((n + 1) / 2)");
  viz->add_option("--depth", va.depth, "Depth map PNG16");
  viz->add_option("--depth-scale", va.depth_scale, "Depth PNG16 scale")->check(CLI::PositiveNumber);
  viz->add_option("--mask", va.mask, "Mask PNG (default: nonzero pixels)");
  viz->add_option("--out", va.out, "Output PNG")->required();

  LossArgs la;
  auto* loss = app.add_subcommand("loss", "Rendering loss of a map set against a dataset sample");
  loss->add_option("--sample", la.sample, "Sample directory")->required();
  loss->add_option("--pred", la.pred, "Map set directory (maps.json + five maps)")->required();
  loss->add_option("--map-weight", la.map_weight, "Weight of the L1 map term against the sample's ground truth")
      ->check(CLI::NonNegativeNumber);

  auto* self = app.add_subcommand("selftest", "Run the built-in invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("usage", e.what(), kUsageError);
  }

  if (threads > 0) set_max_threads(threads);
  if (quiet) log::set_level(log::Level::kQuiet);
  else if (verbose > 0) log::set_level(verbose > 1 ? log::Level::kDebug : log::Level::kInfo);

  try {
    if (render->parsed()) return cmd_render(ra);
    if (gen->parsed()) return cmd_gen_dataset(ga);
    if (cues->parsed()) return cmd_cues(ca);
    if (fit->parsed()) return cmd_fit(fa);
    if (ev->parsed()) return cmd_eval(ea);
    if (ab->parsed()) return cmd_ablate(aa);
    if (viz->parsed()) return cmd_viz(va);
    if (loss->parsed()) return cmd_loss(la);
    if (self->parsed()) return cmd_selftest();
  } catch (const Error& e) {
    return report_error(to_string(e.category()), e.what(), exit_code(e.category()));
  } catch (const fs::filesystem_error& e) {
    return report_error("io", e.what(), kIoError);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kFailure);
  }
  return report_error("usage", "no subcommand", kUsageError);
}

}  // namespace polarcap::cli
