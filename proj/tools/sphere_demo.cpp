// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// Renders the sphere fixture, extracts its cues and fits it back, printing
// what was recovered. Writes a few PNGs when given an output directory.
//
//   sphere_demo [out_dir]

#include <cstdio>
#include <filesystem>

#include "polarcap/polarcap.hpp"

int main(int argc, char** argv) {
  using namespace polarcap;
  const fixtures::Fixture f = fixtures::sphere(64);
  const StokesImage s = compute_stokes(f.render.capture);
  const NormalizedStokesMap cue = normalize_stokes(s);
  const DopAolp da = dop_aolp(s);

  double max_dop = 0.0;
  for (std::size_t i = 0; i < da.dop.size(); ++i) {
    if (f.render.gbuffer.mask[i][0]) max_dop = std::max(max_dop, da.dop[i][0]);
  }
  std::printf("covered pixels %zu, valid Stokes cue %zu, max dop %.3f\n", count(f.render.gbuffer.mask),
              count(cue.valid), max_dop);

  inverse::FitConfig cfg;
  const inverse::FitResult r = inverse::fit_svbrdf(f.fit_inputs(), cfg);
  const Mask& m = f.render.gbuffer.mask;
  std::printf("fit: %d iterations, loss %.3g -> %.3g (%s), %.2fs\n", r.report.iterations_run, r.report.initial_loss,
              r.report.best_loss, r.report.stop_reason.c_str(), r.report.seconds);
  std::printf("normal error %.3f deg, diffuse L1 %.4f, roughness L1 %.4f\n",
              mean_angular_error_deg(r.maps.normal, f.render.gt.normal, m),
              eval::l1_metric(r.maps.diffuse, f.render.gt.diffuse, m),
              eval::l1_metric(r.maps.roughness, f.render.gt.roughness, m));

  if (argc > 1) {
    const std::filesystem::path out = argv[1];
    std::filesystem::create_directories(out);
    io::write_png8((out / "stokes_vis.png").string(), visualize_stokes(cue));
    io::write_png8((out / "normal_gt.png").string(), eval::visualize_normals(f.render.gt.normal, m));
    io::write_png8((out / "normal_fit.png").string(), eval::visualize_normals(r.maps.normal, m));
    io::write_map_set((out / "maps").string(), r.maps);
    std::printf("wrote %s\n", out.string().c_str());
  }
  return 0;
}
