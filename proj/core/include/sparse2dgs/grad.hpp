// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sparse2dgs/camera.hpp"
#include "sparse2dgs/image.hpp"
#include "sparse2dgs/loss.hpp"
#include "sparse2dgs/render.hpp"
#include "sparse2dgs/splat.hpp"

namespace s2dgs {

// Training views and objective settings shared by the loss, the backward
// pass and the optimizer.
struct Objective {
  std::vector<Camera> cameras;
  std::vector<ImageRGB> images;
  RenderConfig render;
  LossWeights weights;

  void validate() const;
};

// Gradient of the total loss in the flat layout of flatten_parameters
// (kParamsPerSplat entries per splat).
struct SplatGradients {
  std::vector<double> values;

  std::size_t splat_count() const { return values.size() / kParamsPerSplat; }
  std::span<const double> splat(std::size_t i) const {
    return std::span<const double>(values).subspan(i * kParamsPerSplat, kParamsPerSplat);
  }
};

struct BackwardResult {
  LossReport report;
  SplatGradients gradients;
};

// Depth-derived normals (world space) of every view, as used by the normal
// consistency term.
std::vector<NormalMap> depth_normals(const SplatScene& scene, const Objective& objective);

// Total loss over all views. With `frozen_normals` the normal consistency
// term uses those maps instead of normals from the current depth.
LossReport evaluate_loss(const SplatScene& scene, const Objective& objective,
                         const std::vector<NormalMap>* frozen_normals = nullptr);

// Loss and its exact gradient. The depth-derived normals are treated as
// constants (no gradient flows through them).
BackwardResult backward(const SplatScene& scene, const Objective& objective);

struct GradCheckOptions {
  double h = 1e-5;
  double abs_floor = 1e-8;
  std::vector<std::size_t> params;  // flat parameter indices; empty = all
};

struct GradCheckEntry {
  std::size_t param = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double error = 0.0;  // 0 when |analytic - numeric| <= abs_floor
  bool skipped = false;
};

struct GradCheckResult {
  double max_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::vector<GradCheckEntry> entries;
};

// Central differences of f around x against `analytic`. When `same_piece`
// is given, a parameter is skipped if same_piece(x +/- h e_i) is false (the
// perturbation crossed a discontinuity of a piecewise-smooth f).
GradCheckResult check_gradient(const std::function<double(std::span<const double>)>& f,
                               std::span<const double> x, std::span<const double> analytic,
                               const GradCheckOptions& options,
                               const std::function<bool(std::span<const double>)>& same_piece = {});

// check_gradient applied to the total loss of `scene`, with depth normals
// frozen at their unperturbed values. Perturbations that change any ray's
// contribution list, an L1 sign, a color clamp state or a normal flip are
// reported as skipped.
GradCheckResult finite_diff_check(const SplatScene& scene, const Objective& objective,
                                  const GradCheckOptions& options = {});

}  // namespace s2dgs
