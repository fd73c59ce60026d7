// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "polarcap/eval.hpp"
#include "polarcap/fixtures.hpp"
#include "support/temp_dir.hpp"

namespace polarcap::eval {
namespace {

using testing::TempDir;

// Independent reference: plain loops, no shared helpers.
double naive_l1(const RgbImage& a, const RgbImage& b, const Mask& m) {
  double s = 0.0;
  int n = 0;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m(x, y, 0) == 0) continue;
      for (int c = 0; c < 3; ++c) s += std::fabs(a(x, y, c) - b(x, y, c));
      n += 3;
    }
  }
  return s / n;
}

RgbImage random_rgb(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RgbImage img(w, h);
  for (auto& p : img.pixels()) p = {u(rng), u(rng), u(rng)};
  return img;
}

Mask random_mask(std::mt19937_64& rng, int w, int h) {
  Mask m(w, h);
  for (auto& p : m.pixels()) p[0] = rng() % 3 != 0;
  m[0][0] = 1;
  return m;
}

TEST(Metrics, IdenticalIsZeroAndOffsetIsExact) {
  std::mt19937_64 rng(1);
  const RgbImage a = random_rgb(rng, 9, 7);
  const Mask m = random_mask(rng, 9, 7);
  EXPECT_EQ(l1_metric(a, a, m), 0.0);
  RgbImage b = a;
  for (auto& p : b.pixels()) p = {p[0] + 0.1, p[1] + 0.1, p[2] + 0.1};
  EXPECT_NEAR(l1_metric(b, a, m), 0.1, 1e-12);
}

TEST(Metrics, MatchesNaiveLoopProperty) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const int w = 1 + static_cast<int>(rng() % 20), h = 1 + static_cast<int>(rng() % 20);
    const RgbImage a = random_rgb(rng, w, h), b = random_rgb(rng, w, h);
    const Mask m = random_mask(rng, w, h);
    EXPECT_NEAR(l1_metric(a, b, m), naive_l1(a, b, m), 1e-9);
    EXPECT_NEAR(l1_metric(a, b, m), l1_metric(b, a, m), 1e-15);
  }
}

TEST(Metrics, EmptyMaskIsAnInputError) {
  const RgbImage a(4, 4);
  try {
    l1_metric(a, a, Mask(4, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kInput);
  }
}

TEST(Metrics, NormalsAreComparedAsDirections) {
  std::mt19937_64 rng(3);
  RgbImage a = random_rgb(rng, 6, 6);
  const Mask m = random_mask(rng, 6, 6);
  RgbImage scaled = a;
  for (auto& p : scaled.pixels()) p = {3 * p[0], 3 * p[1], 3 * p[2]};
  EXPECT_NEAR(l1_normal(scaled, a, m), 0.0, 1e-12);
  // Opposite unit normals differ by 2 in every component's absolute sum.
  RgbImage up(2, 1), down(2, 1);
  up[0] = up[1] = {0, 0, 1};
  down[0] = down[1] = {0, 0, -1};
  EXPECT_NEAR(l1_normal(up, down, Mask(2, 1, 1)), 2.0 / 3.0, 1e-12);
}

TEST(Metrics, DepthIsMedianAligned) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(2.0, 4.0);
  ScalarImage gt(8, 8);
  for (auto& p : gt.pixels()) p[0] = u(rng);
  const Mask m = random_mask(rng, 8, 8);
  ScalarImage shifted = gt;
  for (auto& p : shifted.pixels()) p[0] += 0.37;
  EXPECT_NEAR(l1_depth(shifted, gt, m), 0.0, 1e-12);
  ScalarImage scaled = gt;
  for (auto& p : scaled.pixels()) p[0] *= 2.0;
  EXPECT_GT(l1_depth(scaled, gt, m), 0.1);

  ScalarImage v(4, 1);
  v[0][0] = 1, v[1][0] = 5, v[2][0] = 2, v[3][0] = 9;
  EXPECT_EQ(masked_median(v, Mask(4, 1, 1)), 3.5);
  Mask three(4, 1, 1);
  three[3][0] = 0;
  EXPECT_EQ(masked_median(v, three), 2.0);
}

TEST(Relight, LightsDependOnlyOnSeedIdAndIndex) {
  EvalConfig cfg;
  const Vec3 center{0, 0, -3}, I{5, 5, 5};
  const auto a = relight_light(cfg, "test_000001", 3, center, I);
  const auto b = relight_light(cfg, "test_000001", 3, center, I);
  EXPECT_EQ(a.position.x, b.position.x);
  EXPECT_EQ(a.position.z, b.position.z);
  EXPECT_NE(relight_light(cfg, "test_000001", 4, center, I).position.x, a.position.x);
  EXPECT_NE(relight_light(cfg, "test_000002", 3, center, I).position.x, a.position.x);
  EvalConfig other = cfg;
  other.seed = 1;
  EXPECT_NE(relight_light(other, "test_000001", 3, center, I).position.x, a.position.x);

  // Geometry: inside the cone around +z and within the distance band.
  for (int i = 0; i < 500; ++i) {
    const auto l = relight_light(cfg, "x", i, center, I);
    const Vec3 d = l.position - center;
    const double r = length(d);
    EXPECT_GE(r, 0.8 * 3 - 1e-9);
    EXPECT_LE(r, 1.5 * 3 + 1e-9);
    EXPECT_GE(d.z / r, std::cos(deg_to_rad(60.0)) - 1e-12);
    EXPECT_EQ(l.intensity.x, 5.0);
  }
}

TEST(Relight, GroundTruthAgainstItselfIsZero) {
  const auto f = fixtures::sphere(32);
  EvalConfig cfg;
  const MetricsRow r = evaluate_maps(f.render.gt, f.render.gt, f.scene.camera, f.render.flash.intensity, "s", cfg);
  EXPECT_EQ(r.relights, 20);
  EXPECT_EQ(r.l1_normal, 0.0);
  EXPECT_EQ(r.l1_depth, 0.0);
  EXPECT_EQ(r.l1_render, 0.0);
  EXPECT_EQ(r.l1_render_linear, 0.0);
}

TEST(Relight, WrongAlbedoShowsUpInRenderError) {
  const auto f = fixtures::sphere(32);
  SvbrdfMaps pred = f.render.gt;
  for (auto& p : pred.diffuse.pixels()) p = {p[0] * 0.5, p[1] * 0.5, p[2] * 0.5};
  const MetricsRow r = evaluate_maps(pred, f.render.gt, f.scene.camera, f.render.flash.intensity, "s", EvalConfig{});
  EXPECT_GT(r.l1_render, 1e-3);
  EXPECT_GT(r.l1_render_linear, 0.0);
  EXPECT_EQ(r.l1_normal, 0.0);
}

TEST(Table, PermutationInvariant) {
  std::mt19937_64 rng(5);
  std::vector<MetricsRow> rows;
  for (int i = 0; i < 12; ++i) {
    MetricsRow r;
    r.id = "id" + std::to_string(i);
    r.method = i % 2 ? "a" : "b";
    r.l1_normal = std::uniform_real_distribution<double>(0, 1)(rng);
    r.l1_depth = r.l1_normal * 2;
    r.ok = i != 5;
    rows.push_back(r);
  }
  const std::string ref = to_csv(make_table(rows)) + to_json(make_table(rows)).dump();
  for (int t = 0; t < 20; ++t) {
    std::shuffle(rows.begin(), rows.end(), rng);
    const MetricsTable table = make_table(rows);
    EXPECT_EQ(to_csv(table) + to_json(table).dump(), ref);
    EXPECT_EQ(table.flagged.at("a"), 1);
    EXPECT_EQ(table.evaluated.at("a"), 5);
    EXPECT_EQ(table.evaluated.at("b"), 6);
  }
}

TEST(Table, StatsOfKnownValues) {
  const Stat s = stat_of({4.0, 1.0, 3.0, 2.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
}

class Benchmark : public ::testing::Test {
 protected:
  void SetUp() override {
    cfg_.seed = 3;
    cfg_.resolution = 24;
    cfg_.splits["test"] = {{"builtin:sphere"}, {"procedural:1", "procedural:2", "procedural:3"}, 1, 0};
    dataset::generate_dataset(cfg_, data_.path().string());
    manifest_ = dataset::read_manifest(data_ / "manifest.ndjson");
  }
  dataset::DatasetConfig cfg_;
  TempDir data_{"evaldata"};
  TempDir results_{"evalres"};
  dataset::Manifest manifest_;
};

TEST_F(Benchmark, GroundTruthAsPredictionScoresZero) {
  for (const auto& rec : manifest_.samples) {
    dataset::export_gt_map_set(dataset::sample_dir(manifest_, rec), (results_.path() / rec["id"].get<std::string>()).string());
  }
  const MetricsTable t = evaluate(results_.path().string(), manifest_, EvalConfig{});
  ASSERT_EQ(t.rows.size(), 3u);
  for (const auto& r : t.rows) {
    EXPECT_TRUE(r.ok) << r.error;
    EXPECT_EQ(r.relights, 20);
    EXPECT_EQ(r.l1_normal, 0.0);
    EXPECT_EQ(r.l1_depth, 0.0);
    EXPECT_EQ(r.l1_render, 0.0);
  }
  EXPECT_EQ(t.aggregate.at("fit").at("l1_render").mean, 0.0);
}

TEST_F(Benchmark, ReencodedGroundTruthIsNearZero) {
  // Decoding renormalizes normals, so a re-encoded copy differs by at most a
  // code or so; the metrics must reflect that and nothing more.
  for (const auto& rec : manifest_.samples) {
    const auto s = dataset::load_sample(dataset::sample_dir(manifest_, rec));
    io::write_map_set((results_.path() / rec["id"].get<std::string>()).string(), s.gt);
  }
  const MetricsTable t = evaluate(results_.path().string(), manifest_, EvalConfig{});
  for (const auto& r : t.rows) {
    EXPECT_TRUE(r.ok) << r.error;
    EXPECT_LT(r.l1_normal, 1e-4);
    EXPECT_LT(r.l1_depth, 1e-4);
    EXPECT_LT(r.l1_render, 1e-4);
  }
}

TEST_F(Benchmark, MissingPredictionsAreFlagged) {
  const auto& rec = manifest_.samples.at(1);
  const auto s = dataset::load_sample(dataset::sample_dir(manifest_, rec));
  io::write_map_set((results_.path() / rec["id"].get<std::string>()).string(), s.gt);
  const MetricsTable t = evaluate(results_.path().string(), manifest_, EvalConfig{});
  EXPECT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.flagged.at("fit"), 2);
  EXPECT_EQ(t.evaluated.at("fit"), 1);
  EXPECT_NE(to_csv(t).find("io:"), std::string::npos);
  EXPECT_EQ(evaluate(results_.path().string(), manifest_, EvalConfig{}, "train").rows.size(), 0u);
}

TEST(Ablation, RowsPerModeAndFullAlwaysPresent) {
  std::vector<AblationSample> samples;
  for (int res : {24, 28}) {
    const auto f = fixtures::sphere(res);
    samples.push_back({"sphere" + std::to_string(res), f.fit_inputs(), f.render.gt, f.scene.camera, f.render.flash.intensity});
  }
  inverse::FitConfig fc;
  fc.iterations = 60;
  EvalConfig ec;
  ec.n_relights = 2;
  const MetricsTable t = ablation_suite(samples, {inverse::FitMode::kNoPolarization}, fc, ec);
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.evaluated.at("full"), 2);
  EXPECT_EQ(t.evaluated.at("no-polarization"), 2);
  ASSERT_EQ(t.notes.size(), 1u);
  EXPECT_EQ(t.notes[0]["component"], "neural");
  const auto& agg = t.aggregate;
  EXPECT_GT(agg.at("no-polarization").at("l1_normal").mean, agg.at("full").at("l1_normal").mean);

  const MetricsTable all = ablation_suite({samples[0]}, default_ablation_modes(), fc, ec);
  EXPECT_EQ(all.rows.size(), default_ablation_modes().size());
}

TEST(Config, EvalConfigValidation) {
  EXPECT_THROW(EvalConfig::from_json({{"n_relight", 3}}), Error);
  EXPECT_THROW(EvalConfig::from_json({{"n_relights", 0}}), Error);
  EXPECT_THROW(EvalConfig::from_json({{"cone_deg", 95}}), Error);
  EXPECT_EQ(EvalConfig::from_json({{"n_relights", 7}}).n_relights, 7);
}

TEST(Viz, ComparisonRowTiles) {
  TempDir d("viz");
  dataset::DatasetConfig c;
  c.resolution = 16;
  c.splits["test"] = {{"builtin:sphere"}, {"procedural:4"}, 1, 0};
  dataset::generate_dataset(c, d.path().string());
  const auto m = dataset::read_manifest(d / "manifest.ndjson");
  const auto s = dataset::load_sample(dataset::sample_dir(m, m.samples[0]));
  const Rgb8Image row = comparison_row(s, s.gt, EvalConfig{});
  EXPECT_EQ(row.height(), 16);
  EXPECT_EQ(row.width(), 16 * 12);
}

}  // namespace
}  // namespace polarcap::eval
