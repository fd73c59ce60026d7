// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "polarcap/core/error.hpp"
#include "polarcap/core/log.hpp"
#include "polarcap/core/vec.hpp"

namespace polarcap::render {

using Uv = std::array<double, 2>;
using Triangle = std::array<int, 3>;

/// Indexed triangle mesh with per-vertex normals and UVs.
struct Mesh {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  std::vector<Uv> uvs;
  std::vector<Triangle> triangles;

  std::size_t vertex_count() const { return positions.size(); }
  std::size_t triangle_count() const { return triangles.size(); }

  void validate() const {
    if (triangles.empty()) fail(ErrorCategory::kInput, "mesh has no triangles");
    if (normals.size() != positions.size() || uvs.size() != positions.size()) {
      fail(ErrorCategory::kInput, "mesh attribute arrays differ in length");
    }
    const int n = static_cast<int>(positions.size());
    for (const auto& t : triangles) {
      for (int i : t) {
        if (i < 0 || i >= n) fail(ErrorCategory::kInput, "mesh triangle index out of range");
      }
    }
  }
};

/// Area-weighted vertex normals from the face geometry.
inline void compute_vertex_normals(Mesh& m) {
  m.normals.assign(m.positions.size(), Vec3{});
  for (const auto& t : m.triangles) {
    const Vec3 fn = cross(m.positions[t[1]] - m.positions[t[0]], m.positions[t[2]] - m.positions[t[0]]);
    for (int i : t) m.normals[i] += fn;
  }
  for (auto& n : m.normals) {
    n = normalize(n);
    if (length(n) == 0.0) n = {0.0, 0.0, 1.0};
  }
}

/// Planar UVs from the x/y bounding box.
inline void compute_planar_uvs(Mesh& m) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& p : m.positions) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double sx = x1 > x0 ? 1.0 / (x1 - x0) : 1.0;
  const double sy = y1 > y0 ? 1.0 / (y1 - y0) : 1.0;
  m.uvs.resize(m.positions.size());
  for (std::size_t i = 0; i < m.positions.size(); ++i) {
    m.uvs[i] = {(m.positions[i].x - x0) * sx, (m.positions[i].y - y0) * sy};
  }
}

namespace detail {

[[noreturn]] inline void obj_error(const std::string& name, int line, const std::string& what) {
  fail(ErrorCategory::kParse, name + ":" + std::to_string(line) + ": " + what);
}

// OBJ indices are 1-based; negatives count back from the end.
inline int resolve_obj_index(long long raw, std::size_t count, const std::string& name, int line) {
  if (raw == 0) obj_error(name, line, "face index 0 is invalid (OBJ indices are 1-based)");
  const long long idx = raw > 0 ? raw - 1 : static_cast<long long>(count) + raw;
  if (idx < 0 || idx >= static_cast<long long>(count)) {
    obj_error(name, line, "face index " + std::to_string(raw) + " out of range");
  }
  return static_cast<int>(idx);
}

}  // namespace detail

/// Parses the v / vt / vn / f subset of Wavefront OBJ. Polygons are fanned into
/// triangles. Missing normals are rebuilt from faces; missing UVs fall back to
/// a planar projection (with a warning).
inline Mesh parse_obj(std::istream& in, const std::string& name = "<obj>") {
  std::vector<Vec3> v;
  std::vector<Vec3> vn;
  std::vector<Uv> vt;
  struct Corner {
    int v, t, n;
    auto operator<=>(const Corner&) const = default;
  };
  std::vector<std::array<Corner, 3>> faces;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v" || tag == "vn") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) detail::obj_error(name, line_no, "expected three numbers after '" + tag + "'");
      (tag == "v" ? v : vn).push_back({x, y, z});
    } else if (tag == "vt") {
      double s, t;
      if (!(ls >> s >> t)) detail::obj_error(name, line_no, "expected two numbers after 'vt'");
      vt.push_back({s, t});
    } else if (tag == "f") {
      std::vector<Corner> poly;
      std::string tok;
      while (ls >> tok) {
        Corner c{-1, -1, -1};
        std::array<std::string, 3> parts;
        std::size_t part = 0;
        for (char ch : tok) {
          if (ch == '/') {
            if (++part > 2) detail::obj_error(name, line_no, "malformed face corner '" + tok + "'");
          } else {
            parts[part] += ch;
          }
        }
        auto parse_int = [&](const std::string& s) -> long long {
          std::size_t used = 0;
          long long val = 0;
          try {
            val = std::stoll(s, &used);
          } catch (const std::exception&) {
            detail::obj_error(name, line_no, "malformed face corner '" + tok + "'");
          }
          if (used != s.size()) detail::obj_error(name, line_no, "malformed face corner '" + tok + "'");
          return val;
        };
        if (parts[0].empty()) detail::obj_error(name, line_no, "face corner without vertex index");
        c.v = detail::resolve_obj_index(parse_int(parts[0]), v.size(), name, line_no);
        if (!parts[1].empty()) c.t = detail::resolve_obj_index(parse_int(parts[1]), vt.size(), name, line_no);
        if (!parts[2].empty()) c.n = detail::resolve_obj_index(parse_int(parts[2]), vn.size(), name, line_no);
        poly.push_back(c);
      }
      if (poly.size() < 3) detail::obj_error(name, line_no, "face with fewer than 3 vertices");
      for (std::size_t i = 1; i + 1 < poly.size(); ++i) faces.push_back({poly[0], poly[i], poly[i + 1]});
    }
    // Other directives (o, g, s, usemtl, mtllib, ...) carry nothing we use.
  }
  if (faces.empty()) fail(ErrorCategory::kParse, name + ": no faces");

  bool all_normals = true;
  bool all_uvs = true;
  for (const auto& f : faces) {
    for (const auto& c : f) {
      all_normals &= c.n >= 0;
      all_uvs &= c.t >= 0;
    }
  }

  // One output vertex per distinct (v, vt, vn) corner.
  Mesh mesh;
  std::map<Corner, int> remap;
  for (const auto& f : faces) {
    Triangle tri;
    for (int k = 0; k < 3; ++k) {
      Corner key = f[k];
      if (!all_normals) key.n = -1;
      if (!all_uvs) key.t = -1;
      auto [it, inserted] = remap.try_emplace(key, static_cast<int>(mesh.positions.size()));
      if (inserted) {
        mesh.positions.push_back(v[key.v]);
        mesh.normals.push_back(all_normals ? normalize(vn[key.n]) : Vec3{});
        mesh.uvs.push_back(all_uvs ? vt[key.t] : Uv{0.0, 0.0});
      }
      tri[k] = it->second;
    }
    mesh.triangles.push_back(tri);
  }
  if (!all_normals) compute_vertex_normals(mesh);
  if (!all_uvs) {
    log::warn(name + ": no texture coordinates, using planar projection");
    compute_planar_uvs(mesh);
  }
  for (auto& n : mesh.normals) {
    if (length(n) == 0.0) n = {0.0, 0.0, 1.0};
  }
  return mesh;
}

inline Mesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::kIo, "cannot open mesh '" + path + "'");
  return parse_obj(in, path);
}

inline void write_obj(const Mesh& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCategory::kIo, "cannot write mesh '" + path + "'");
  out << std::setprecision(17);
  for (const auto& p : m.positions) out << "v " << p.x << ' ' << p.y << ' ' << p.z << '\n';
  for (const auto& t : m.uvs) out << "vt " << t[0] << ' ' << t[1] << '\n';
  for (const auto& n : m.normals) out << "vn " << n.x << ' ' << n.y << ' ' << n.z << '\n';
  for (const auto& t : m.triangles) {
    out << 'f';
    for (int i : t) out << ' ' << i + 1 << '/' << i + 1 << '/' << i + 1;
    out << '\n';
  }
  if (!out) fail(ErrorCategory::kIo, "failed writing mesh '" + path + "'");
}

/// Recenters on the bounding-box center and scales to unit bounding radius.
inline void normalize_to_unit_sphere(Mesh& m) {
  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const auto& p : m.positions) {
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
  const Vec3 center = 0.5 * (lo + hi);
  double radius = 0.0;
  for (const auto& p : m.positions) radius = std::max(radius, length(p - center));
  if (radius <= 0.0) fail(ErrorCategory::kInput, "degenerate mesh extent");
  for (auto& p : m.positions) p = (p - center) / radius;
}

// Procedural meshes.

inline Mesh make_uv_sphere(int segments, int rings, double radius = 1.0) {
  Mesh m;
  for (int r = 0; r <= rings; ++r) {
    const double theta = kPi * r / rings;
    for (int s = 0; s <= segments; ++s) {
      const double phi = 2.0 * kPi * s / segments;
      const Vec3 n{std::sin(theta) * std::cos(phi), std::cos(theta), -std::sin(theta) * std::sin(phi)};
      m.positions.push_back(n * radius);
      m.normals.push_back(n);
      m.uvs.push_back({static_cast<double>(s) / segments, 1.0 - static_cast<double>(r) / rings});
    }
  }
  const int row = segments + 1;
  for (int r = 0; r < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      const int a = r * row + s, b = a + row, c = b + 1, d = a + 1;
      if (r != 0) m.triangles.push_back({a, b, d});
      if (r != rings - 1) m.triangles.push_back({d, b, c});
    }
  }
  return m;
}

/// Subdivided icosahedron; 20 * 4^level faces.
inline Mesh make_icosphere(int level, double radius = 1.0) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p = normalize(p);
  std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto [it, inserted] = mid.try_emplace({key.first, key.second}, static_cast<int>(v.size()));
      if (inserted) v.push_back(normalize(v[a] + v[b]));
      return it->second;
    };
    std::vector<Triangle> next;
    for (const auto& tri : f) {
      const int ab = midpoint(tri[0], tri[1]), bc = midpoint(tri[1], tri[2]), ca = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  Mesh m;
  m.triangles = std::move(f);
  for (const auto& p : v) {
    m.positions.push_back(p * radius);
    m.normals.push_back(p);
    m.uvs.push_back({0.5 + std::atan2(p.z, p.x) / (2.0 * kPi), 0.5 + std::asin(p.y) / kPi});
  }
  return m;
}

/// Square in the z = 0 plane facing +z, side length `size`.
inline Mesh make_plane(double size, int subdivisions = 1) {
  Mesh m;
  const int n = std::max(1, subdivisions);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double u = static_cast<double>(i) / n, v = static_cast<double>(j) / n;
      m.positions.push_back({(u - 0.5) * size, (v - 0.5) * size, 0.0});
      m.normals.push_back({0.0, 0.0, 1.0});
      m.uvs.push_back({u, v});
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = j * (n + 1) + i, b = a + 1, c = a + n + 2, d = a + n + 1;
      m.triangles.push_back({a, b, c});
      m.triangles.push_back({a, c, d});
    }
  }
  return m;
}

inline Mesh make_torus(double major, double minor, int segments, int sides) {
  Mesh m;
  for (int i = 0; i <= segments; ++i) {
    const double u = 2.0 * kPi * i / segments;
    for (int j = 0; j <= sides; ++j) {
      const double v = 2.0 * kPi * j / sides;
      const Vec3 center{major * std::cos(u), 0.0, major * std::sin(u)};
      const Vec3 n{std::cos(v) * std::cos(u), std::sin(v), std::cos(v) * std::sin(u)};
      m.positions.push_back(center + minor * n);
      m.normals.push_back(n);
      m.uvs.push_back({static_cast<double>(i) / segments, static_cast<double>(j) / sides});
    }
  }
  for (int i = 0; i < segments; ++i) {
    for (int j = 0; j < sides; ++j) {
      const int a = i * (sides + 1) + j, b = a + sides + 1, c = b + 1, d = a + 1;
      m.triangles.push_back({a, d, b});
      m.triangles.push_back({d, c, b});
    }
  }
  return m;
}

/// Sphere with a smooth radial bump pattern; normals recomputed from faces.
inline Mesh make_blob(int segments, int rings, double amplitude = 0.15, int lobes = 3) {
  Mesh m = make_uv_sphere(segments, rings);
  for (auto& p : m.positions) {
    const Vec3 d = normalize(p);
    const double bump = 1.0 + amplitude * std::sin(lobes * d.x * kPi) * std::cos(lobes * d.y * kPi * 0.5) *
                                  std::cos(lobes * d.z * kPi * 0.5);
    p = d * bump;
  }
  compute_vertex_normals(m);
  // The UV seam duplicates positions; average their normals so shading is seamless.
  std::map<std::tuple<long long, long long, long long>, Vec3> acc;
  auto key = [](const Vec3& p) {
    return std::make_tuple(std::llround(p.x * 1e9), std::llround(p.y * 1e9), std::llround(p.z * 1e9));
  };
  for (std::size_t i = 0; i < m.positions.size(); ++i) acc[key(m.positions[i])] += m.normals[i];
  for (std::size_t i = 0; i < m.positions.size(); ++i) m.normals[i] = normalize(acc[key(m.positions[i])]);
  return m;
}

/// Builtin meshes addressable from catalogs as "builtin:<name>".
inline Mesh builtin_mesh(const std::string& name) {
  if (name == "sphere") return make_uv_sphere(128, 64);
  if (name == "icosphere") return make_icosphere(2);
  if (name == "torus") return make_torus(0.7, 0.3, 96, 48);
  if (name == "blob") return make_blob(128, 64);
  if (name == "plane") return make_plane(2.0, 4);
  if (name.rfind("blob:", 0) == 0) {  // blob:<lobes>
    int lobes = 0;
    try {
      lobes = std::stoi(name.substr(5));
    } catch (const std::exception&) {
    }
    if (lobes < 1 || lobes > 16) fail(ErrorCategory::kConfig, "builtin blob lobes must be in [1, 16]: '" + name + "'");
    return make_blob(128, 64, 0.15, lobes);
  }
  fail(ErrorCategory::kConfig, "unknown builtin mesh '" + name + "'");
}

/// Resolves a catalog entry: "builtin:<name>" or an OBJ path.
inline Mesh load_mesh_entry(const std::string& entry) {
  constexpr std::string_view prefix = "builtin:";
  if (entry.rfind(prefix, 0) == 0) return builtin_mesh(entry.substr(prefix.size()));
  return load_obj(entry);
}

}  // namespace polarcap::render
