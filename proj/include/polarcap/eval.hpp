// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// Error metrics between predicted and ground-truth maps, relighting-based
// rendering error, benchmark tables and the fit ablation harness.

#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "polarcap/core/error.hpp"
#include "polarcap/core/hash.hpp"
#include "polarcap/dataset.hpp"
#include "polarcap/inverse/fit.hpp"
#include "polarcap/io/maps.hpp"
#include "polarcap/render/shade.hpp"

namespace polarcap::eval {

using nlohmann::json;

/// Mean absolute difference over masked pixels and all channels.
template <int C>
double l1_metric(const Image<double, C>& pred, const Image<double, C>& gt, const Mask& mask) {
  require_same_size(pred, gt, "l1 pred/gt");
  require_same_size(mask, gt, "l1 mask");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i][0]) continue;
    for (int c = 0; c < C; ++c) sum += std::abs(pred[i][c] - gt[i][c]);
    ++n;
  }
  if (n == 0) fail(ErrorCategory::kInput, "l1_metric: empty mask");
  return sum / static_cast<double>(n * C);
}

/// Normals are renormalized to unit vectors before the componentwise L1, so
/// quantization or unnormalized predictions do not register as error.
inline double l1_normal(const RgbImage& pred, const RgbImage& gt, const Mask& mask) {
  const auto unit = [&](const RgbImage& img) {
    RgbImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) {
      const Vec3 n = normalize({img[i][0], img[i][1], img[i][2]});
      out[i] = {n.x, n.y, n.z};
    }
    return out;
  };
  require_same_size(pred, gt, "l1 normal");
  return l1_metric(unit(pred), unit(gt), mask);
}

inline double masked_median(const ScalarImage& img, const Mask& mask) {
  std::vector<double> v;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i][0]) v.push_back(img[i][0]);
  }
  if (v.empty()) fail(ErrorCategory::kInput, "median of empty mask");
  const std::size_t k = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  const double hi = v[k];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k));
  return 0.5 * (lo + hi);
}

/// Depth L1 after shifting the prediction so both medians agree.
inline double l1_depth(const ScalarImage& pred, const ScalarImage& gt, const Mask& mask) {
  require_same_size(pred, gt, "l1 depth");
  const double shift = masked_median(gt, mask) - masked_median(pred, mask);
  ScalarImage aligned = pred;
  for (auto& p : aligned.pixels()) p[0] += shift;
  return l1_metric(aligned, gt, mask);
}

struct EvalConfig {
  int n_relights = 20;
  double cone_deg = 60.0;        // light directions within this angle of the view axis
  double distance_min = 0.8;     // times the object distance
  double distance_max = 1.5;
  double gamma = 2.2;            // tonemap clamp(v)^(1/gamma)
  std::uint64_t seed = 0;
  std::string method = "fit";

  void validate() const {
    if (n_relights < 1) fail(ErrorCategory::kConfig, "eval: n_relights must be >= 1");
    if (!(cone_deg >= 0.0 && cone_deg < 90.0)) fail(ErrorCategory::kConfig, "eval: cone_deg must be in [0, 90)");
    if (!(distance_min > 0.0 && distance_max >= distance_min)) fail(ErrorCategory::kConfig, "eval: bad distance range");
    if (!(gamma > 0.0)) fail(ErrorCategory::kConfig, "eval: gamma must be > 0");
  }

  static EvalConfig from_json(const json& j) {
    EvalConfig c;
    try {
      for (const auto& [k, v] : j.items()) {
        if (k == "n_relights") c.n_relights = v.get<int>();
        else if (k == "cone_deg") c.cone_deg = v.get<double>();
        else if (k == "distance_min") c.distance_min = v.get<double>();
        else if (k == "distance_max") c.distance_max = v.get<double>();
        else if (k == "gamma") c.gamma = v.get<double>();
        else if (k == "seed") c.seed = v.get<std::uint64_t>();
        else if (k == "method") c.method = v.get<std::string>();
        else fail(ErrorCategory::kConfig, "eval config: unknown key '" + k + "'");
      }
    } catch (const json::exception& e) {
      fail(ErrorCategory::kConfig, std::string("eval config: ") + e.what());
    }
    c.validate();
    return c;
  }
};

/// The i-th relighting light of a sample; depends only on (seed, id, i).
/// `center` is the object point the cone is aimed from, `intensity` the
/// fixed light intensity.
inline render::PointLight relight_light(const EvalConfig& cfg, const std::string& id, int i, const Vec3& center,
                                        const Vec3& intensity) {
  std::mt19937_64 rng(mix_seed(cfg.seed, fnv1a(id), static_cast<std::uint64_t>(i)));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double cos_max = std::cos(deg_to_rad(cfg.cone_deg));
  const double ct = 1.0 - uni(rng) * (1.0 - cos_max);
  const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
  const double ph = 2.0 * kPi * uni(rng);
  const double dist = -center.z * (cfg.distance_min + (cfg.distance_max - cfg.distance_min) * uni(rng));
  const Vec3 dir{st * std::cos(ph), st * std::sin(ph), ct};  // around +z, back toward the camera
  return {center + dir * dist, intensity};
}

inline RgbImage tonemap(const RgbImage& img, double gamma) {
  RgbImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (int c = 0; c < 3; ++c) out[i][c] = std::pow(std::clamp(img[i][c], 0.0, 1.0), 1.0 / gamma);
  }
  return out;
}

struct RenderError {
  double tonemapped = 0.0;
  double linear = 0.0;
  int relights = 0;
};

/// Mean rendering L1 over the configured relights. Both map sets are shaded
/// with their own depth and normals; the light is placed relative to the
/// ground-truth object.
inline RenderError relight_error(const SvbrdfMaps& pred, const SvbrdfMaps& gt, const Mask& mask,
                                 const render::Camera& cam, const Vec3& intensity, const std::string& id,
                                 const EvalConfig& cfg) {
  const Vec3 center{0.0, 0.0, -masked_median(gt.depth, mask)};
  SvbrdfMaps p = pred, g = gt;
  p.mask = mask;
  g.mask = mask;
  RenderError e;
  for (int i = 0; i < cfg.n_relights; ++i) {
    const render::PointLight light = relight_light(cfg, id, i, center, intensity);
    const RgbImage a = render::render_relit(p, light, cam);
    const RgbImage b = render::render_relit(g, light, cam);
    e.linear += l1_metric(a, b, mask);
    e.tonemapped += l1_metric(tonemap(a, cfg.gamma), tonemap(b, cfg.gamma), mask);
    ++e.relights;
  }
  e.linear /= cfg.n_relights;
  e.tonemapped /= cfg.n_relights;
  return e;
}

struct MetricsRow {
  std::string id;
  std::string method;
  double l1_normal = 0.0;
  double l1_depth = 0.0;
  double l1_render = 0.0;         // tonemapped, mean over relights
  double l1_render_linear = 0.0;  // linear radiance, mean over relights
  int relights = 0;
  bool ok = true;
  std::string error;  // why the row is flagged when !ok
};

inline MetricsRow evaluate_maps(const SvbrdfMaps& pred, const SvbrdfMaps& gt, const render::Camera& cam,
                                const Vec3& intensity, const std::string& id, const EvalConfig& cfg) {
  cfg.validate();
  require_same_size(pred.mask, gt.mask, "eval pred/gt");
  Mask mask(gt.width(), gt.height());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i][0] = gt.mask[i][0] && pred.mask[i][0];
  if (count(mask) == 0) fail(ErrorCategory::kInput, "eval: prediction does not cover the object");
  MetricsRow r;
  r.id = id;
  r.method = cfg.method;
  r.l1_normal = l1_normal(pred.normal, gt.normal, mask);
  r.l1_depth = l1_depth(pred.depth, gt.depth, mask);
  const RenderError re = relight_error(pred, gt, mask, cam, intensity, id, cfg);
  r.l1_render = re.tonemapped;
  r.l1_render_linear = re.linear;
  r.relights = re.relights;
  return r;
}

struct Stat {
  double mean = 0.0;
  double median = 0.0;
};

struct MetricsTable {
  std::vector<MetricsRow> rows;  // sorted by (method, id)
  std::map<std::string, std::map<std::string, Stat>> aggregate;  // method -> metric -> stat
  std::map<std::string, int> evaluated;                          // method -> rows included
  std::map<std::string, int> flagged;                            // method -> rows excluded
  std::vector<json> notes;
};

inline Stat stat_of(std::vector<double> v) {
  Stat s;
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  const std::size_t k = v.size() / 2;
  s.median = v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
  return s;
}

/// Sorts rows and computes per-method aggregates over the rows that are ok.
/// The result does not depend on the input order.
inline MetricsTable make_table(std::vector<MetricsRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    return std::tie(a.method, a.id) < std::tie(b.method, b.id);
  });
  MetricsTable t;
  std::map<std::string, std::map<std::string, std::vector<double>>> vals;
  for (const auto& r : rows) {
    if (!r.ok) {
      ++t.flagged[r.method];
      continue;
    }
    ++t.evaluated[r.method];
    vals[r.method]["l1_normal"].push_back(r.l1_normal);
    vals[r.method]["l1_depth"].push_back(r.l1_depth);
    vals[r.method]["l1_render"].push_back(r.l1_render);
    vals[r.method]["l1_render_linear"].push_back(r.l1_render_linear);
  }
  for (auto& [m, metrics] : vals) {
    for (auto& [k, v] : metrics) t.aggregate[m][k] = stat_of(std::move(v));
  }
  for (const auto& r : rows) {
    if (!t.evaluated.count(r.method)) t.evaluated[r.method] = 0;
    if (!t.flagged.count(r.method)) t.flagged[r.method] = 0;
  }
  t.rows = std::move(rows);
  return t;
}

/// Scores every manifest sample against `<results>/<id>/` (a map set written
/// by write_map_set). Missing or unreadable predictions are flagged rows.
inline MetricsTable evaluate(const std::string& results_dir, const dataset::Manifest& manifest, const EvalConfig& cfg,
                             const std::string& split = "") {
  namespace fs = std::filesystem;
  cfg.validate();
  std::vector<MetricsRow> rows;
  for (const json& rec : manifest.samples) {
    if (!split.empty() && rec.value("split", "") != split) continue;
    MetricsRow r;
    r.id = rec.at("id").get<std::string>();
    r.method = cfg.method;
    try {
      const dataset::Sample gt = dataset::load_sample(dataset::sample_dir(manifest, rec));
      const std::string pdir = (fs::path(results_dir) / r.id).string();
      if (!fs::exists(fs::path(pdir) / "maps.json")) fail(ErrorCategory::kIo, "no prediction for " + r.id);
      const SvbrdfMaps pred = io::read_map_set(pdir);
      r = evaluate_maps(pred, gt.gt, gt.camera, gt.flash.intensity, r.id, cfg);
    } catch (const Error& e) {
      r.ok = false;
      r.error = std::string(to_string(e.category())) + ": " + e.what();
    }
    rows.push_back(std::move(r));
  }
  return make_table(std::move(rows));
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(9) << v;
  return s.str();
}

inline std::string to_csv(const MetricsTable& t) {
  std::ostringstream s;
  s << "id,method,l1_normal,l1_depth,l1_render,l1_render_linear,relights,ok,error\n";
  for (const auto& r : t.rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    s << r.id << ',' << r.method << ',' << fmt(r.l1_normal) << ',' << fmt(r.l1_depth) << ',' << fmt(r.l1_render)
      << ',' << fmt(r.l1_render_linear) << ',' << r.relights << ',' << (r.ok ? 1 : 0) << ',' << err << '\n';
  }
  return s.str();
}

inline json to_json(const MetricsTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json j{{"id", r.id},
           {"method", r.method},
           {"ok", r.ok},
           {"relights", r.relights}};
    if (r.ok) {
      j["l1_normal"] = r.l1_normal;
      j["l1_depth"] = r.l1_depth;
      j["l1_render"] = r.l1_render;
      j["l1_render_linear"] = r.l1_render_linear;
    } else {
      j["error"] = r.error;
    }
    rows.push_back(std::move(j));
  }
  json agg = json::object();
  for (const auto& [m, metrics] : t.aggregate) {
    for (const auto& [k, st] : metrics) agg[m][k] = {{"mean", st.mean}, {"median", st.median}};
  }
  json j{{"rows", rows}, {"aggregate", agg}, {"evaluated", t.evaluated}, {"flagged", t.flagged}};
  if (!t.notes.empty()) j["notes"] = t.notes;
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCategory::kIo, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) fail(ErrorCategory::kIo, "failed to write '" + path + "'");
}

/// One ablation input: observed capture with its ground truth.
struct AblationSample {
  std::string id;
  inverse::FitInputs inputs;
  SvbrdfMaps gt;
  render::Camera camera;
  Vec3 intensity;
};

inline std::vector<inverse::FitMode> default_ablation_modes() {
  return {inverse::FitMode::kFull, inverse::FitMode::kNoPolarizedLoss, inverse::FitMode::kNoPolarization};
}

/// Fits every sample in every mode and scores it; rows are tagged with the
/// mode name. The full mode is always included, as the baseline. The
/// skip-connection ablation concerns the learned estimator only and is
/// listed in the notes.
inline MetricsTable ablation_suite(const std::vector<AblationSample>& samples, std::vector<inverse::FitMode> modes,
                                   const inverse::FitConfig& fit_cfg, const EvalConfig& eval_cfg) {
  if (std::find(modes.begin(), modes.end(), inverse::FitMode::kFull) == modes.end()) {
    modes.insert(modes.begin(), inverse::FitMode::kFull);
  }
  std::vector<MetricsRow> rows;
  for (const auto mode : modes) {
    inverse::FitConfig fc = fit_cfg;
    fc.mode = mode;
    EvalConfig ec = eval_cfg;
    ec.method = std::string(inverse::to_string(mode));
    for (const auto& s : samples) {
      const inverse::FitResult fr = inverse::fit_svbrdf(s.inputs, fc);
      rows.push_back(evaluate_maps(fr.maps, s.gt, s.camera, s.intensity, s.id, ec));
    }
  }
  MetricsTable t = make_table(std::move(rows));
  t.notes.push_back({{"ablation", "plain-skip-connections"},
                     {"component", "neural"},
                     {"status", "not applicable to the optimization fit"}});
  return t;
}

// ---- Visualization -------------------------------------------------------

inline std::uint8_t to8(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

/// (n + 1) / 2 on the mask, black elsewhere.
inline Rgb8Image visualize_normals(const RgbImage& n, const Mask& mask) {
  Rgb8Image out(n.width(), n.height());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (mask[i][0]) out[i] = {to8(0.5 * (n[i][0] + 1)), to8(0.5 * (n[i][1] + 1)), to8(0.5 * (n[i][2] + 1))};
  }
  return out;
}

/// Near is bright; the masked range is stretched to [0.1, 1].
inline Rgb8Image visualize_depth(const ScalarImage& d, const Mask& mask) {
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!mask[i][0]) continue;
    lo = std::min(lo, d[i][0]);
    hi = std::max(hi, d[i][0]);
  }
  Rgb8Image out(d.width(), d.height());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!mask[i][0]) continue;
    const double t = hi > lo ? (hi - d[i][0]) / (hi - lo) : 1.0;
    const std::uint8_t v = to8(0.1 + 0.9 * t);
    out[i] = {v, v, v};
  }
  return out;
}

inline Rgb8Image visualize_rgb(const RgbImage& img, double gamma = 1.0) {
  Rgb8Image out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (int c = 0; c < 3; ++c) out[i][c] = to8(std::pow(std::clamp(img[i][c], 0.0, 1.0), 1.0 / gamma));
  }
  return out;
}

/// Tiles images left to right (all the same size).
inline Rgb8Image hstack(const std::vector<Rgb8Image>& tiles) {
  if (tiles.empty()) return {};
  const int w = tiles[0].width(), h = tiles[0].height();
  Rgb8Image out(w * static_cast<int>(tiles.size()), h);
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    require_same_size(tiles[0], tiles[t], "grid tile");
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out(static_cast<int>(t) * w + x, y) = tiles[t](x, y);
    }
  }
  return out;
}

inline Rgb8Image vstack(const std::vector<Rgb8Image>& rows) {
  if (rows.empty()) return {};
  const int w = rows[0].width();
  int h = 0;
  for (const auto& r : rows) {
    if (r.width() != w) fail(ErrorCategory::kInput, "grid rows differ in width");
    h += r.height();
  }
  Rgb8Image out(w, h);
  int y0 = 0;
  for (const auto& r : rows) {
    for (int y = 0; y < r.height(); ++y) {
      for (int x = 0; x < w; ++x) out(x, y0 + y) = r(x, y);
    }
    y0 += r.height();
  }
  return out;
}

/// Comparison row: full input, Stokes visualization, then GT and prediction
/// for normals, diffuse, specular and roughness, then the first relight of
/// GT and prediction.
inline Rgb8Image comparison_row(const dataset::Sample& s, const SvbrdfMaps& pred, const EvalConfig& cfg) {
  const Mask& m = s.gt.mask;
  const auto gray = [&](const ScalarImage& r) {
    RgbImage out(r.width(), r.height());
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = {r[i][0], r[i][0], r[i][0]};
    return visualize_rgb(out);
  };
  const Vec3 center{0.0, 0.0, -masked_median(s.gt.depth, m)};
  const render::PointLight light = relight_light(cfg, s.record.value("id", ""), 0, center, s.flash.intensity);
  SvbrdfMaps p = pred;
  p.mask = m;
  return hstack({visualize_rgb(s.full, cfg.gamma), visualize_stokes(s.stokes_cue),
                 visualize_normals(s.gt.normal, m), visualize_normals(pred.normal, m),
                 visualize_rgb(s.gt.diffuse), visualize_rgb(pred.diffuse),
                 visualize_rgb(s.gt.specular), visualize_rgb(pred.specular),
                 gray(s.gt.roughness), gray(pred.roughness),
                 visualize_rgb(render::render_relit(s.gt, light, s.camera), cfg.gamma),
                 visualize_rgb(render::render_relit(p, light, s.camera), cfg.gamma)});
}

}  // namespace polarcap::eval
