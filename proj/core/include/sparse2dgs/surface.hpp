// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "sparse2dgs/camera.hpp"
#include "sparse2dgs/image.hpp"
#include "sparse2dgs/mesh.hpp"
#include "sparse2dgs/render.hpp"
#include "sparse2dgs/splat.hpp"

namespace s2dgs {

// Truncated signed distance samples on a regular grid of points
// origin + voxel_size * (i, j, k). Values are normalized by `trunc` and lie in
// [-1, 1]; positive in front of the observed surface. Unobserved points have
// weight 0 and value 1.
class TsdfVolume {
 public:
  TsdfVolume() = default;
  TsdfVolume(const Vec3& origin, double voxel_size, const std::array<int, 3>& dims, double trunc);

  // Grid covering [lo, hi] (inclusive, rounded outward to whole voxels).
  static TsdfVolume from_bounds(const Vec3& lo, const Vec3& hi, double voxel_size, double trunc);

  const Vec3& origin() const { return origin_; }
  double voxel_size() const { return voxel_size_; }
  const std::array<int, 3>& dims() const { return dims_; }
  double trunc() const { return trunc_; }
  std::size_t size() const { return tsdf_.size(); }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * dims_[1] + j) * dims_[0] + i;
  }
  Vec3 point(int i, int j, int k) const { return origin_ + voxel_size_ * Vec3(i, j, k); }

  double tsdf(int i, int j, int k) const { return tsdf_[index(i, j, k)]; }
  double weight(int i, int j, int k) const { return weight_[index(i, j, k)]; }
  std::vector<double>& tsdf_values() { return tsdf_; }
  std::vector<double>& weight_values() { return weight_; }
  const std::vector<double>& tsdf_values() const { return tsdf_; }
  const std::vector<double>& weight_values() const { return weight_; }

 private:
  Vec3 origin_ = Vec3::Zero();
  double voxel_size_ = 1.0;
  std::array<int, 3> dims_{0, 0, 0};
  double trunc_ = 1.0;
  std::vector<double> tsdf_;
  std::vector<double> weight_;
};

// Depth kept where the mask is foreground, 0 (invalid) elsewhere.
DepthMap apply_mask(const DepthMap& depth, const Mask& mask);

// Fuses one depth map. A grid point projecting to pixel (floor(fx x/z + cx),
// floor(fy y/z + cy)) with valid depth D gets sdf = D - z; when sdf > -trunc
// the sample min(1, sdf / trunc) is averaged in with weight 1.
void tsdf_integrate(TsdfVolume& volume, const DepthMap& depth, const Camera& camera);

// Zero level set of the volume. Only cells whose eight corners all have
// weight > 0 are polygonized; shared edge vertices are emitted once.
TriangleMesh marching_cubes(const TsdfVolume& volume);

struct TsdfParams {
  double voxel_size = 0.01;
  double trunc = 0.0;     // 0 = 4 x voxel_size
  double padding = 0.05;  // bounds padding, fraction of the extent per side
};

// Renders depth for every camera, masks it (when masks are given), fuses
// the maps into a volume bounded by the splat centers and extracts the mesh.
TriangleMesh reconstruct(const SplatScene& scene, const std::vector<Camera>& cameras,
                         const std::vector<Mask>& masks, const TsdfParams& params,
                         const RenderConfig& render = {});

}  // namespace s2dgs
