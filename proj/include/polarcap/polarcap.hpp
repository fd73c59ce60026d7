// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// Everything, for tools and quick experiments.

#pragma once

#include "polarcap/brdf.hpp"
#include "polarcap/cues.hpp"
#include "polarcap/dataset.hpp"
#include "polarcap/eval.hpp"
#include "polarcap/fixtures.hpp"
#include "polarcap/inverse/fit.hpp"
#include "polarcap/inverse/integrate.hpp"
#include "polarcap/inverse/loss.hpp"
#include "polarcap/io/maps.hpp"
#include "polarcap/io/png.hpp"
#include "polarcap/render/camera.hpp"
#include "polarcap/render/material.hpp"
#include "polarcap/render/mesh.hpp"
#include "polarcap/render/rasterize.hpp"
#include "polarcap/render/shade.hpp"
#include "polarcap/stokes.hpp"
#include "polarcap/svbrdf_maps.hpp"
