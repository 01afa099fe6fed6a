// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sparse2dgs/geometry.hpp"
#include "sparse2dgs/image.hpp"

namespace s2dgs {

// Positions with optional per-point colors (RGB in [0,1]) and unit normals.
// An attribute vector is either empty or the same length as `points`.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> colors;
  std::vector<Vec3> normals;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return !colors.empty(); }
  bool has_normals() const { return !normals.empty(); }

  // Throws InvalidArgument on misaligned attributes, non-finite coordinates or
  // non-unit normals (tolerance 1e-6).
  void validate() const;
};

// Dense per-pixel 3D coordinates (e.g. a DUSt3R point map), row-major.
struct PointMap {
  int width = 0;
  int height = 0;
  std::vector<Vec3> data;
  std::vector<std::uint8_t> valid;

  const Vec3& at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  bool is_valid(int x, int y) const { return valid[static_cast<std::size_t>(y) * width + x] != 0; }
  void validate() const;
};

struct FusionParams {
  double voxel_size = 0.005;
  int outlier_k = 20;
  double outlier_std_ratio = 2.0;
  int icp_max_iters = 50;
  double icp_tolerance = 1e-7;
  // <= 0 means 10 * voxel_size.
  double icp_max_corr_dist = 0.0;

  double max_correspondence_distance() const {
    return icp_max_corr_dist > 0.0 ? icp_max_corr_dist : 10.0 * voxel_size;
  }
  void validate() const;
};

PointCloud transform_cloud(const RigidTransform& t, const PointCloud& cloud);

// Attributes survive only when both inputs carry them.
PointCloud concatenate(const PointCloud& a, const PointCloud& b);

// One point per valid entry, in row-major order; colors copied from `image`
// when given (dimensions must match).
PointCloud pointmap_to_cloud(const PointMap& map, const ImageRGB* image = nullptr);

// Centroid of each occupied voxel floor(p / voxel_size). Output is ordered by
// voxel key so it does not depend on input order beyond summation order.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

struct OutlierResult {
  PointCloud cloud;
  std::vector<std::uint8_t> kept;  // one flag per input point
};

// Keeps points whose mean distance to their k nearest neighbors is at most
// mean + std_ratio * stddev over all points. Clouds with fewer than k + 1
// points are returned unchanged.
OutlierResult remove_statistical_outliers(const PointCloud& cloud, int k, double std_ratio);

struct IcpResult {
  RigidTransform transform;  // maps source into the target frame
  double rmse = 0.0;         // inlier RMSE after the final update
  int iterations = 0;
  std::size_t correspondences = 0;
};

// Point-to-point ICP from the identity. Throws InvalidArgument when no
// correspondence lies within the maximum distance on the first iteration.
IcpResult icp_align(const PointCloud& source, const PointCloud& target, const FusionParams& params);

// DUSt3R cloud: downsample -> outlier removal -> ICP onto the COLMAP cloud;
// the result is the COLMAP cloud followed by the aligned DUSt3R points.
PointCloud integrate_clouds(const PointCloud& colmap, const PointCloud& dust3r,
                            const FusionParams& params);

// Point map container: "S2PM" magic, u32 version (1), u32 width, u32 height,
// then width*height float32 xyz triples (row-major) and width*height mask bytes.
PointMap load_pointmap(const std::filesystem::path& path);
void save_pointmap(const PointMap& map, const std::filesystem::path& path);

}  // namespace s2dgs
