// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sparse2dgs/camera.hpp"
#include "sparse2dgs/image.hpp"
#include "sparse2dgs/splat.hpp"

namespace s2dgs {

enum class Precision { f32, f64 };

const char* precision_name(Precision p);
Precision parse_precision(const std::string& name);

struct RenderConfig {
  double epsilon = 1e-6;                     // depth normalization denominator
  double transmittance_cutoff = 1e-4;
  int max_contribs_per_ray = 256;
  double gaussian_cutoff = std::exp(-4.5);   // 3 sigma
  Precision precision = Precision::f64;
  // Screen-space culling by conservative footprint boxes. Produces exactly
  // the same buffers as the brute-force path (every splat tested against
  // every pixel).
  bool culling = true;

  void validate() const;
};

struct RayHit {
  double u = 0.0;
  double v = 0.0;
  double t = 0.0;  // ray parameter
  double z = 0.0;  // depth of the hit along `depth_axis`
};

// Solves origin + t d = p + s_u t_u u + s_v t_v v. Empty when the ray is
// parallel to the splat plane (|d . n| < 1e-9) or the hit is at t <= 0.
// z = t (d . depth_axis); pass the camera optical axis to get camera-space
// depth. When depth_axis is omitted z is the distance along the ray.
std::optional<RayHit> intersect_ray_splat(const Ray& ray, const Splat2D& splat);
std::optional<RayHit> intersect_ray_splat(const Ray& ray, const Splat2D& splat,
                                          const Vec3& depth_axis);

struct CompositeInput {
  double alpha = 0.0;     // decoded opacity
  double gaussian = 0.0;  // G(u, v)
  Vec3 color = Vec3::Zero();
  double depth = 0.0;
  Vec3 normal = Vec3::Zero();
};

struct CompositeResult {
  Vec3 color = Vec3::Zero();
  double depth = 0.0;
  double acc_weight = 0.0;
  Vec3 normal = Vec3::Zero();
  std::vector<double> weights;        // one per input; 0 where skipped or past the stop
  std::vector<double> transmittance;  // transmittance in front of each input
};

// Front-to-back alpha blending of depth-sorted contributions.
//   w_i = a_i prod_{j<i} (1 - a_j),  a_i = alpha_i G_i
//   C   = sum w_i c_i + (1 - sum w_i) background
//   D   = sum w_i z_i / (sum w_i + epsilon)
// Inputs with a_i == 0 are skipped. Traversal stops once the transmittance
// behind a contribution drops below the cutoff or K contributions were used.
CompositeResult composite_ray(std::span<const CompositeInput> sorted, const Vec3& background,
                              const RenderConfig& config);

// One blended splat of one pixel, as retained for the backward pass.
struct Contribution {
  std::uint32_t splat = 0;
  bool flipped = false;         // splat normal was flipped to face the camera
  double weight = 0.0;          // w_i
  double depth = 0.0;           // camera-space z of the hit
  double gaussian = 0.0;        // G(u, v)
  double alpha = 0.0;           // decoded opacity
  double u = 0.0;
  double v = 0.0;
  double transmittance = 0.0;   // in front of this contribution
  Vec3 normal = Vec3::Zero();   // camera-facing splat normal (world)
};

struct RenderBuffers {
  ImageRGB color;
  DepthMap depth;
  Grid<double> acc_weight;
  NormalMap splat_normal;  // sum w_i n_i, world space, unnormalized

  // Per-pixel contribution lists in CSR form (pixel index = y * width + x),
  // filled when rendering with retain = true.
  std::vector<Contribution> contribs;
  std::vector<std::uint32_t> offsets;

  int width() const { return color.width(); }
  int height() const { return color.height(); }
  bool retained() const { return !offsets.empty(); }
  std::span<const Contribution> pixel_contribs(int x, int y) const;
};

RenderBuffers render_view(const SplatScene& scene, const Camera& camera,
                          const RenderConfig& config = {}, bool retain = false);

// Camera-space normals of the surface implied by a depth map: pixels are
// backprojected and N = normalize(dP/dx x dP/dy) by central differences,
// oriented toward the camera (N . P < 0). Zero on the image border and
// wherever the pixel or a 4-neighbor has no valid depth (depth <= 0, or
// acc_weight == 0 when a weight map is given).
NormalMap depth_to_normal(const DepthMap& depth, const Camera& camera,
                          const Grid<double>* acc_weight = nullptr);

}  // namespace s2dgs
