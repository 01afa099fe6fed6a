// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "sparse2dgs/camera.hpp"
#include "sparse2dgs/image.hpp"
#include "sparse2dgs/render.hpp"

namespace s2dgs {

struct LossWeights {
  double alpha = 1000.0;  // depth distortion
  double beta = 0.05;     // normal consistency
  double lambda = 0.2;    // D-SSIM share of the color term
  int dssim_window = 11;
  double dssim_sigma = 1.5;

  void validate() const;
};

struct LossReport {
  double total = 0.0;
  double color = 0.0;
  double l1 = 0.0;
  double dssim = 0.0;
  double distortion = 0.0;
  double normal = 0.0;

  LossReport& operator+=(const LossReport& other);
};

struct ColorLoss {
  double color = 0.0;  // (1 - lambda) l1 + lambda dssim
  double l1 = 0.0;
  double dssim = 0.0;
};

// Normalized 1-D Gaussian window; the 2-D window is its outer product.
std::vector<double> gaussian_window(int size, double sigma);

// Mean SSIM over pixels and channels. Local statistics use the Gaussian
// window with zero padding ("same" size output).
double mean_ssim(const ImageRGB& a, const ImageRGB& b, int window = 11, double sigma = 1.5);

ColorLoss color_loss(const ImageRGB& rendered, const ImageRGB& gt, double lambda, int window = 11,
                     double sigma = 1.5);

// d color / d rendered, same shape as the images.
ImageRGB color_loss_gradient(const ImageRGB& rendered, const ImageRGB& gt, double lambda,
                             int window = 11, double sigma = 1.5);

struct ColorLossGradient {
  ColorLoss loss;
  ImageRGB gradient;  // empty unless requested
};

// color_loss and color_loss_gradient sharing one pass over the SSIM statistics.
ColorLossGradient color_loss_with_gradient(const ImageRGB& rendered, const ImageRGB& gt, double lambda,
                                           int window, double sigma, bool with_grad);

// sum_i sum_{j<i} w_i w_j |z_i - z_j| for one ray, in any order.
double ray_distortion(std::span<const double> weights, std::span<const double> depths);

// sum_i w_i (1 - n_i . N) for one ray.
double ray_normal_consistency(std::span<const double> weights, std::span<const Vec3> normals,
                              const Vec3& depth_normal);

// Mean of ray_distortion over pixels with at least one contribution.
// Requires retained contributions.
double distortion_loss(const RenderBuffers& buffers);

// Mean of ray_normal_consistency over pixels where depth_normal is nonzero.
// depth_normal is in world space. Requires retained contributions.
double normal_loss(const RenderBuffers& buffers, const NormalMap& depth_normal);

// World-space normals from the rendered depth (see depth_to_normal).
NormalMap world_depth_normals(const RenderBuffers& buffers, const Camera& camera);

// Loss of one view: color terms against `gt`, distortion, and normal
// consistency against `depth_normal` (world space). A precomputed color
// loss for the same images may be passed to skip recomputing it.
LossReport view_loss(const RenderBuffers& buffers, const ImageRGB& gt, const NormalMap& depth_normal,
                     const LossWeights& weights, const ColorLoss* precomputed = nullptr);

// Sum of view_loss over the views, with depth normals computed from each
// view's own render.
LossReport total_loss(std::span<const RenderBuffers> buffers, std::span<const ImageRGB> gt,
                      std::span<const Camera> cameras, const LossWeights& weights);

}  // namespace s2dgs
