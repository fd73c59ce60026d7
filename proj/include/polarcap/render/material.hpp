// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "polarcap/brdf.hpp"
#include "polarcap/core/error.hpp"
#include "polarcap/core/hash.hpp"
#include "polarcap/core/image.hpp"
#include "polarcap/core/vec.hpp"
#include "polarcap/io/png.hpp"

namespace polarcap::render {

/// A UV-mapped SVBRDF: diffuse and specular albedo and GGX roughness textures.
struct TextureSet {
  std::string id;
  RgbImage diffuse;
  RgbImage specular;
  ScalarImage roughness;

  void validate() const {
    if (diffuse.empty() || specular.empty() || roughness.empty()) {
      fail(ErrorCategory::kInput, "material '" + id + "' has an empty texture");
    }
  }
};

/// Per-sample UV augmentation.
struct UvTransform {
  double scale = 1.0;
  double offset_u = 0.0;
  double offset_v = 0.0;
};

struct MaterialPoint {
  Vec3 diffuse;
  Vec3 specular;
  double roughness;
};

namespace detail {

template <int C>
std::array<double, C> sample_bilinear(const Image<double, C>& img, double u, double v) {
  // v = 0 is the bottom row of the texture.
  const double fx = (u - std::floor(u)) * img.width() - 0.5;
  const double fy = (1.0 - (v - std::floor(v))) * img.height() - 0.5;
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double tx = fx - x0, ty = fy - y0;
  auto wrap = [](int i, int n) { return ((i % n) + n) % n; };
  const int xa = wrap(x0, img.width()), xb = wrap(x0 + 1, img.width());
  const int ya = wrap(y0, img.height()), yb = wrap(y0 + 1, img.height());
  std::array<double, C> out{};
  for (int c = 0; c < C; ++c) {
    out[c] = (1 - tx) * (1 - ty) * img(xa, ya, c) + tx * (1 - ty) * img(xb, ya, c) +
             (1 - tx) * ty * img(xa, yb, c) + tx * ty * img(xb, yb, c);
  }
  return out;
}

// Tileable value noise on a `cells` x `cells` lattice, smoothstep-interpolated.
class ValueNoise {
 public:
  ValueNoise(std::uint64_t seed, int cells) : cells_(cells), lattice_(static_cast<std::size_t>(cells) * cells) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (auto& v : lattice_) v = uni(rng);
  }

  double operator()(double u, double v) const {
    const double x = u * cells_, y = v * cells_;
    const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    const double tx = smooth(x - x0), ty = smooth(y - y0);
    auto at = [&](int i, int j) {
      i = ((i % cells_) + cells_) % cells_;
      j = ((j % cells_) + cells_) % cells_;
      return lattice_[static_cast<std::size_t>(j) * cells_ + i];
    };
    return (1 - tx) * (1 - ty) * at(x0, y0) + tx * (1 - ty) * at(x0 + 1, y0) + (1 - tx) * ty * at(x0, y0 + 1) +
           tx * ty * at(x0 + 1, y0 + 1);
  }

 private:
  static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }
  int cells_;
  std::vector<double> lattice_;
};

}  // namespace detail

inline MaterialPoint sample_material(const TextureSet& t, double u, double v, const UvTransform& xf = {}) {
  const double su = u * xf.scale + xf.offset_u;
  const double sv = v * xf.scale + xf.offset_v;
  const auto d = detail::sample_bilinear(t.diffuse, su, sv);
  const auto s = detail::sample_bilinear(t.specular, su, sv);
  const auto r = detail::sample_bilinear(t.roughness, su, sv);
  return {{d[0], d[1], d[2]}, {s[0], s[1], s[2]}, std::clamp(r[0], brdf::kAlphaMin, 1.0)};
}

/// Spatially uniform material, handy for fixtures.
inline TextureSet constant_material(const Vec3& diffuse, const Vec3& specular, double roughness,
                                    std::string id = "constant") {
  TextureSet t;
  t.id = std::move(id);
  t.diffuse = RgbImage(1, 1);
  t.diffuse[0] = {diffuse.x, diffuse.y, diffuse.z};
  t.specular = RgbImage(1, 1);
  t.specular[0] = {specular.x, specular.y, specular.z};
  t.roughness = ScalarImage(1, 1, roughness);
  return t;
}

/// Deterministic procedural SVBRDF: two-tone albedo pattern, gray specular
/// level and a varying roughness field.
inline TextureSet procedural_material(std::uint64_t seed, int size = 128) {
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto color = [&] {
    const double h = uni(rng) * 6.0;
    const double sat = 0.2 + 0.7 * uni(rng);
    const double val = 0.25 + 0.65 * uni(rng);
    const int sector = static_cast<int>(h) % 6;
    const double f = h - std::floor(h);
    const double p = val * (1 - sat), q = val * (1 - sat * f), t = val * (1 - sat * (1 - f));
    switch (sector) {
      case 0: return Vec3{val, t, p};
      case 1: return Vec3{q, val, p};
      case 2: return Vec3{p, val, t};
      case 3: return Vec3{p, q, val};
      case 4: return Vec3{t, p, val};
      default: return Vec3{val, p, q};
    }
  };
  const Vec3 c0 = color();
  const Vec3 c1 = color();
  const double spec_level = 0.1 + 0.8 * uni(rng);
  const double rough_lo = 0.08 + 0.3 * uni(rng);
  const double rough_hi = std::min(1.0, rough_lo + 0.1 + 0.5 * uni(rng));
  const int cells = 2 + static_cast<int>(uni(rng) * 6.0);
  const detail::ValueNoise pattern(rng(), cells);
  const detail::ValueNoise fine(rng(), cells * 4);
  const detail::ValueNoise rough(rng(), cells * 2);

  TextureSet t;
  t.id = "procedural:" + std::to_string(seed);
  t.diffuse = RgbImage(size, size);
  t.specular = RgbImage(size, size);
  t.roughness = ScalarImage(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double u = (x + 0.5) / size, v = 1.0 - (y + 0.5) / size;
      const double m = std::clamp((pattern(u, v) - 0.5) * 4.0 + 0.5, 0.0, 1.0);
      const double grain = 0.9 + 0.2 * fine(u, v);
      const Vec3 d = (c0 * (1 - m) + c1 * m) * grain;
      t.diffuse(x, y) = {std::clamp(d.x, 0.0, 1.0), std::clamp(d.y, 0.0, 1.0), std::clamp(d.z, 0.0, 1.0)};
      const double s = std::clamp(spec_level * (0.8 + 0.4 * (1 - m)), 0.0, 1.0);
      t.specular(x, y) = {s, s, s};
      t.roughness(x, y, 0) = std::clamp(rough_lo + (rough_hi - rough_lo) * rough(u, v), brdf::kAlphaMin, 1.0);
    }
  }
  return t;
}

/// Texture-set directory with diffuse.png, specular.png and roughness.png
/// (8- or 16-bit, values read as code / max). Other files are ignored.
inline TextureSet load_material_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  TextureSet t;
  t.id = dir;
  for (const char* name : {"diffuse.png", "specular.png", "roughness.png"}) {
    if (!fs::exists(fs::path(dir) / name)) fail(ErrorCategory::kIo, "material '" + dir + "' lacks " + name);
  }
  t.diffuse = io::read_png_as<3>((fs::path(dir) / "diffuse.png").string());
  t.specular = io::read_png_as<3>((fs::path(dir) / "specular.png").string());
  t.roughness = io::read_png_as<1>((fs::path(dir) / "roughness.png").string());
  for (auto& p : t.roughness.pixels()) p[0] = std::clamp(p[0], brdf::kAlphaMin, 1.0);
  return t;
}

/// Catalog entry: "procedural:<seed>", "constant:<r>,<g>,<b>,<spec>,<rough>"
/// or a texture-set directory.
inline TextureSet load_material_entry(const std::string& entry) {
  if (entry.rfind("procedural:", 0) == 0) {
    const std::string num = entry.substr(11);
    if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos || num.size() > 19) {
      fail(ErrorCategory::kConfig, "malformed procedural material '" + entry + "'");
    }
    return procedural_material(std::stoull(num));
  }
  if (entry.rfind("constant:", 0) == 0) {
    std::array<double, 5> v{};
    std::size_t pos = 9;
    for (int i = 0; i < 5; ++i) {
      const std::size_t comma = entry.find(',', pos);
      try {
        v[i] = std::stod(entry.substr(pos, comma - pos));
      } catch (const std::exception&) {
        fail(ErrorCategory::kConfig, "malformed constant material '" + entry + "'");
      }
      if (comma == std::string::npos && i < 4) fail(ErrorCategory::kConfig, "malformed constant material '" + entry + "'");
      pos = comma + 1;
    }
    return constant_material({v[0], v[1], v[2]}, {v[3], v[3], v[3]}, v[4], entry);
  }
  TextureSet t = load_material_dir(entry);
  t.validate();
  return t;
}

}  // namespace polarcap::render
