// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sparse2dgs/geometry.hpp"
#include "sparse2dgs/pointcloud.hpp"

namespace s2dgs {

double sigmoid(double x);
double logit(double p);

// Rotation matrix of the normalized quaternion q = (w, x, y, z).
Mat3 rotation_from_quaternion(const Vec4& q);
// Unit quaternion (w >= 0) of a rotation matrix.
Vec4 quaternion_from_rotation(const Mat3& r);
// Rotation whose third column is `normal`.
Mat3 frame_from_normal(const Vec3& normal);

// A planar Gaussian disk stored in its optimizable (unconstrained) form.
// Decoded quantities:
//   tangent frame  R(q / |q|) = [t_u | t_v | n],  n = t_u x t_v
//   scales         s = exp(log_scales) > 0
//   opacity        sigmoid(opacity_logit) in (0, 1)
//   color          clamp(color, 0, 1) at render time
struct Splat2D {
  Vec3 center = Vec3::Zero();
  Vec4 rotation = Vec4(1.0, 0.0, 0.0, 0.0);
  Vec2 log_scales = Vec2::Zero();
  double opacity_logit = 0.0;
  Vec3 color = Vec3::Constant(0.5);

  Mat3 frame() const { return rotation_from_quaternion(rotation); }
  Vec3 tangent_u() const { return frame().col(0); }
  Vec3 tangent_v() const { return frame().col(1); }
  Vec3 normal() const { return frame().col(2); }
  Vec2 scales() const { return Vec2(std::exp(log_scales.x()), std::exp(log_scales.y())); }
  double opacity() const { return sigmoid(opacity_logit); }

  static Splat2D from_decoded(const Vec3& center, const Mat3& frame, double scale_u,
                              double scale_v, double opacity, const Vec3& color);
};

struct SplatScene {
  std::vector<Splat2D> splats;
  Vec3 background = Vec3::Zero();

  std::size_t size() const { return splats.size(); }
  bool empty() const { return splats.empty(); }
  // Finite parameters and a non-degenerate quaternion for every splat.
  void validate() const;
};

// exp(-(u^2 + v^2) / 2)
double gaussian_value(double u, double v);

// p + s_u t_u u + s_v t_v v
Vec3 splat_point(const Splat2D& splat, double u, double v);

// Flat parameter layout, kParamsPerSplat values per splat in scene order.
enum ParamOffset : int {
  kCenter = 0,       // 3
  kRotation = 3,     // 4 (w, x, y, z)
  kLogScale = 7,     // 2
  kOpacityLogit = 9, // 1
  kColor = 10,       // 3
  kParamsPerSplat = 13,
};

std::vector<double> flatten_parameters(const SplatScene& scene);
void unflatten_parameters(std::span<const double> params, SplatScene& scene);

struct InitOptions {
  int knn_k = 3;
  double opacity = 0.1;
  std::uint64_t seed = 0;  // orientation of splats without a point normal
  Vec3 background = Vec3::Zero();
};

// One splat per point: centered on the point, isotropic scale equal to the
// mean distance to its knn_k nearest neighbors, oriented by the point normal
// when present (uniformly random otherwise), colored by the point color
// (mid-gray otherwise).
SplatScene init_splats(const PointCloud& cloud, const InitOptions& options = {});

// Binary checkpoint of decoded parameters; see docs/formats.md.
void save_checkpoint(const SplatScene& scene, const std::filesystem::path& path);
SplatScene load_checkpoint(const std::filesystem::path& path);

}  // namespace s2dgs
