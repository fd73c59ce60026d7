// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, each with its own
// runtime budget. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "polarcap/brdf.hpp"
#include "polarcap/dataset.hpp"
#include "polarcap/eval.hpp"
#include "polarcap/fixtures.hpp"
#include "polarcap/inverse/fit.hpp"
#include "polarcap/inverse/integrate.hpp"
#include "polarcap/stokes.hpp"
#include "support/gradient_probe.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

namespace {

using namespace polarcap;
using testing::kOraclePi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(q * (v.size() - 1))];
}

// ---- A1 --------------------------------------------------------------------

Outcome stokes_round_trip() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const CaptureSet c = testing::random_capture(rng, 16, 16);
    const StokesImage s = compute_stokes(c);
    const DerivedInputs d = derive_inputs(c);
    const RadianceImage* ref[4] = {&c.i0, &c.i45, &c.i90, &d.i135};
    for (int j = 0; j < 4; ++j) {
      const RadianceImage f = filter_image(s, 45.0 * j);
      for (std::size_t i = 0; i < f.size(); ++i) {
        for (int k = 0; k < 3; ++k) worst = std::max(worst, testing::rel_err(f[i][k], (*ref[j])[i][k], 1e-12));
      }
    }
  }
  return {worst < 1e-6, fmt("worst relative error %.3g over 100 capture sets", worst)};
}

// ---- A2 --------------------------------------------------------------------

Outcome fresnel_physics() {
  const double rp = brdf::fresnel(std::atan(1.5), 1.5).r_p;
  const auto f0 = brdf::fresnel(0.0, 1.5);
  bool mono = true;
  double prev = brdf::diffuse_dop(0.0);
  for (int i = 1; i < 900; ++i) {
    const double v = brdf::diffuse_dop(deg_to_rad(0.1 * i));
    mono = mono && v > prev;
    prev = v;
  }
  const bool ok = rp < 1e-9 && std::abs(f0.r_s - 0.04) < 1e-12 && std::abs(f0.r_p - 0.04) < 1e-12 &&
                  brdf::diffuse_dop(0.0) == 0.0 && mono;
  return {ok, fmt("r_p(brewster) %.2g, r_s(0) %.6f, r_p(0) %.6f, monotone %.0f", rp, f0.r_s, f0.r_p, mono ? 1 : 0)};
}

// ---- A3 --------------------------------------------------------------------

Outcome azimuth_cue() {
  render::Scene s;
  s.mesh = render::make_icosphere(5);
  s.camera.width = s.camera.height = 512;
  s.material = render::constant_material({0.6, 0.5, 0.4}, {0.3, 0.3, 0.3}, 0.3);
  const auto r = render::render_capture(s);
  const auto da = dop_aolp(r.stokes);
  std::vector<double> err;
  for (int y = 0; y < 512; ++y) {
    for (int x = 0; x < 512; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * 512 + x;
      if (!r.gbuffer.mask[i][0] || !(da.dop[i][0] > 0.01)) continue;
      // Analytic unit sphere at the scene translation, by ray intersection.
      const Vec3 d = normalize(s.camera.ray(x, y));
      const Vec3 c = s.translation;
      const double b = dot(d, c), disc = b * b - (dot(c, c) - 1.0);
      if (disc < 0.0) continue;
      const Vec3 n = normalize(d * (b - std::sqrt(disc)) - c);
      const double expect = std::fmod(std::atan2(n.y, n.x) + 1.5 * kOraclePi, kOraclePi);
      double e = std::abs(da.aolp[i][0] - expect);
      e = std::min(e, kOraclePi - e);
      err.push_back(e * 180.0 / kOraclePi);
    }
  }
  if (err.size() < 1000) return {false, "too few polarized pixels"};
  const double med = percentile(err, 0.5), p95 = percentile(err, 0.95);
  return {med < 1.0 && p95 < 3.0, fmt("median %.2g deg, p95 %.2g deg over %.0f pixels", med, p95, err.size())};
}

// ---- A4 --------------------------------------------------------------------

Outcome gradients() {
  const auto f = fixtures::sphere(32);
  const auto p = testing::random_probe_problem(f, 101);
  const auto s = testing::run_gradient_probes(p, 200, 7);
  return {s.pass_fraction() >= 0.95, fmt("%.0f/%.0f probes within 1e-4 (%.0f kink-adjacent excluded), worst %.2g",
                                         s.passed, s.probes - s.excluded, s.excluded, s.worst_rel)};
}

// ---- A5 --------------------------------------------------------------------

Outcome recovery(const fixtures::Fixture& f) {
  const Mask& m = f.render.gbuffer.mask;
  inverse::FitConfig cfg;
  const inverse::FitResult full = inverse::fit_svbrdf(f.fit_inputs(), cfg);
  cfg.mode = inverse::FitMode::kNoPolarization;
  const inverse::FitResult blind = inverse::fit_svbrdf(f.fit_inputs(), cfg);
  const double err = mean_angular_error_deg(full.maps.normal, f.render.gt.normal, m);
  const double err_blind = mean_angular_error_deg(blind.maps.normal, f.render.gt.normal, m);
  const double dl1 = eval::l1_metric(full.maps.diffuse, f.render.gt.diffuse, m);
  const double term = full.report.final_terms.polarized_render_term;
  return {err < 3.0 && dl1 < 0.02 && term < 1e-3 && err_blind > err,
          fmt("normal %.3f deg, diffuse L1 %.4f, render term %.2g; without cue %.2f deg", err, dl1, term, err_blind)};
}

// ---- A6 --------------------------------------------------------------------

Outcome integration() {
  const int n = 128;
  const double h = 2.0 / (n - 1);
  RgbImage normals(n, n);
  ScalarImage z(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double x = -1.0 + c * h, y = 1.0 - r * h;
      z(c, r)[0] = -(x * x + y * y) / 4.0;
      const Vec3 nn = normalize(Vec3{x / 2.0, y / 2.0, 1.0});
      normals(c, r) = {nn.x, nn.y, nn.z};
    }
  }
  const Mask m(n, n, 1);
  const ScalarImage got = inverse::integrate_normals(normals, m, h);
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < m.size(); ++i) ma += got[i][0], mb += z[i][0];
  ma /= m.size();
  mb /= m.size();
  double se = 0;
  for (std::size_t i = 0; i < m.size(); ++i) se += std::pow((got[i][0] - ma) - (z[i][0] - mb), 2);
  const double rmse = std::sqrt(se / m.size());
  return {rmse < 1e-3, fmt("rmse %.3g", rmse)};
}

// ---- A7 --------------------------------------------------------------------

Outcome dataset_pipeline() {
  const dataset::DatasetConfig cfg =
      dataset::DatasetConfig::from_json(io::read_json(std::string(POLARCAP_SOURCE_DIR) + "/configs/toy.json"));
  testing::TempDir a("accept_a7a"), b("accept_a7b");
  const auto sum = dataset::generate_dataset(cfg, a.path().string());
  dataset::generate_dataset(cfg, b.path().string());
  const auto m = dataset::read_manifest(sum.manifest);
  std::string why;
  const bool identical = testing::same_tree(a.path(), b.path(), &why);

  bool counts = m.samples.size() == 6;
  double worst_ratio = 0.0;  // max |decoded - rendered| / quantization step
  const auto& split = cfg.splits.at("train");
  const auto plan = dataset::plan_split("train", split, cfg.seed);
  for (std::size_t k = 0; k < m.samples.size(); ++k) {
    const std::string dir = dataset::sample_dir(m, m.samples[k]);
    int pol = 0, gt = 0, cue = 0;
    for (const char* s : dataset::kPolarizedStems) pol += std::filesystem::exists(dir + "/" + s + ".png");
    for (const char* s : dataset::kGtStems) gt += std::filesystem::exists(dir + "/" + s + ".png");
    for (const char* s : dataset::kCueStems) cue += std::filesystem::exists(dir + "/" + s + ".png");
    counts = counts && pol == 4 && gt == 5 && cue == 2;

    // Re-render the planned sample and compare with the decoded files.
    const auto& spec = plan[k];
    render::Mesh mesh = render::load_mesh_entry(split.meshes[spec.mesh_index]);
    render::normalize_to_unit_sphere(mesh);
    const auto draw = dataset::draw_sample(cfg, spec.seed);
    render::Scene sc;
    sc.mesh = mesh;
    sc.rotation = draw.rotation;
    sc.translation = {0.0, 0.0, -cfg.object_distance};
    sc.camera.fov_deg = cfg.fov_deg;
    sc.camera.width = sc.camera.height = cfg.resolution;
    sc.material = render::load_material_entry(split.materials[spec.material_index]);
    sc.uv = draw.uv;
    const auto r = render::render_capture(sc);
    const auto& enc = m.samples[k].at("encodings");
    const auto check = [&](const auto& truth, const std::string& stem, bool masked) {
      using Img = std::decay_t<decltype(truth)>;
      const auto e = io::encoding_from(enc.at(stem), stem);
      const Img got = io::read_png_as<Img::kChannels>(dir + "/" + stem + ".png", e, truth.width(), truth.height());
      const double step = e.scale / 65535.0;
      for (std::size_t i = 0; i < truth.size(); ++i) {
        if (masked && !r.gt.mask[i][0]) continue;
        for (int c = 0; c < Img::kChannels; ++c) worst_ratio = std::max(worst_ratio, std::abs(got[i][c] - truth[i][c]) / step);
      }
    };
    check(r.capture.i0, "i000", false);
    check(r.capture.i45, "i045", false);
    check(r.capture.i90, "i090", false);
    check(r.i135, "i135", false);
    check(r.gt.diffuse, "gt_diffuse", true);
    check(r.gt.specular, "gt_specular", true);
    check(r.gt.roughness, "gt_roughness", true);
    check(r.gt.normal, "gt_normal", true);
    check(r.gt.depth, "gt_depth", true);
  }
  const bool half = worst_ratio <= 0.5 + 1e-6;
  std::string detail = fmt("%.0f samples, worst PNG16 error %.3f steps", m.samples.size(), worst_ratio);
  detail += counts ? ", 4 + 5 + 2 files each" : ", wrong file counts";
  detail += identical ? ", regeneration byte-identical" : ", regeneration differs at " + why;
  return {counts && identical && half, detail};
}

// ---- A8 --------------------------------------------------------------------

Outcome evaluation_protocol() {
  dataset::DatasetConfig cfg =
      dataset::DatasetConfig::from_json(io::read_json(std::string(POLARCAP_SOURCE_DIR) + "/configs/benchmark.json"));
  cfg.resolution = 24;  // toy resolution
  const auto& split = cfg.splits.at("test");
  const auto plan = dataset::benchmark_plan(split.meshes, split.materials, cfg.seed);
  std::set<std::pair<int, int>> pairs;
  for (const auto& s : plan) pairs.emplace(s.mesh_index, s.material_index);
  const bool plan_ok = split.meshes.size() == 6 && split.materials.size() == 30 && plan.size() == 250 && pairs.size() == 180;

  testing::TempDir data("accept_a8d"), res("accept_a8r");
  dataset::generate_dataset(cfg, data.path().string());
  const auto m = dataset::read_manifest(data / "manifest.ndjson");
  for (const auto& rec : m.samples) {
    dataset::export_gt_map_set(dataset::sample_dir(m, rec), (res.path() / rec.at("id").get<std::string>()).string());
  }
  const eval::EvalConfig ecfg = eval::EvalConfig::from_json(io::read_json(std::string(POLARCAP_SOURCE_DIR) + "/configs/benchmark.json").at("eval"));
  const auto t = eval::evaluate(res.path().string(), m, ecfg);
  bool twenty = ecfg.n_relights == 20, zero = true, ok = t.rows.size() == 250;
  for (const auto& r : t.rows) {
    ok = ok && r.ok;
    twenty = twenty && r.relights == 20;
    zero = zero && r.l1_normal == 0.0 && r.l1_depth == 0.0 && r.l1_render == 0.0 && r.l1_render_linear == 0.0;
  }
  std::string detail = fmt("%.0f records over %.0f distinct pairs, %.0f rows scored", plan.size(), pairs.size(),
                           t.evaluated.count("fit") ? t.evaluated.at("fit") : 0);
  detail += twenty ? ", 20 relights each" : ", wrong relight count";
  detail += zero ? ", GT self-eval all zero" : ", GT self-eval nonzero";
  return {plan_ok && ok && twenty && zero, detail};
}

struct Criterion {
  const char* id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  log::set_level(log::Level::kQuiet);
  const std::vector<Criterion> criteria = {
      {"A1", "stokes round trip", 5.0, stokes_round_trip},
      {"A2", "fresnel physics", 1.0, fresnel_physics},
      {"A3", "polarization azimuth cue", 30.0, azimuth_cue},
      {"A4", "gradient correctness", 60.0, gradients},
      {"A5", "inverse recovery (sphere)", 300.0, [] { return recovery(fixtures::sphere(64)); }},
      {"A5", "inverse recovery (textured plane)", 300.0, [] { return recovery(fixtures::textured_plane(64)); }},
      {"A6", "normal integration", 5.0, integration},
      {"A7", "dataset pipeline", 120.0, dataset_pipeline},
      {"A8", "evaluation protocol", 120.0, evaluation_protocol},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs < c.budget_s;
    failed += !pass;
    std::printf("%s %s %s: %s (%.2f s, budget %.0f s)\n", c.id, pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                c.budget_s);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
