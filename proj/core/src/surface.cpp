// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparse2dgs/surface.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "sparse2dgs/error.hpp"
#include "sparse2dgs/parallel.hpp"

namespace s2dgs {

void TriangleMesh::validate() const {
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!is_finite(vertices[i])) throw InvalidArgument("mesh: vertex " + std::to_string(i) + " is not finite");
  }
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    for (const std::uint32_t v : tri) {
      if (v >= vertices.size()) {
        throw InvalidArgument("mesh: triangle " + std::to_string(t) + " references missing vertex " +
                              std::to_string(v));
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw InvalidArgument("mesh: triangle " + std::to_string(t) + " repeats a vertex");
    }
  }
}

TsdfVolume::TsdfVolume(const Vec3& origin, double voxel_size, const std::array<int, 3>& dims, double trunc)
    : origin_(origin), voxel_size_(voxel_size), dims_(dims), trunc_(trunc) {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) throw InvalidArgument("tsdf: voxel_size must be > 0");
  if (!(trunc >= voxel_size)) throw InvalidArgument("tsdf: trunc must be >= voxel_size");
  if (!is_finite(origin)) throw InvalidArgument("tsdf: origin must be finite");
  std::size_t n = 1;
  for (const int d : dims) {
    if (d < 1) throw InvalidArgument("tsdf: dims must be positive");
    n *= static_cast<std::size_t>(d);
  }
  if (n > (std::size_t{1} << 28)) throw InvalidArgument("tsdf: volume too large (" + std::to_string(n) + " voxels)");
  tsdf_.assign(n, 1.0);
  weight_.assign(n, 0.0);
}

TsdfVolume TsdfVolume::from_bounds(const Vec3& lo, const Vec3& hi, double voxel_size, double trunc) {
  if (!is_finite(lo) || !is_finite(hi) || (hi - lo).minCoeff() < 0.0) {
    throw InvalidArgument("tsdf: invalid bounds");
  }
  if (!(voxel_size > 0.0)) throw InvalidArgument("tsdf: voxel_size must be > 0");
  std::array<int, 3> dims{};
  for (int a = 0; a < 3; ++a) {
    const double cells = std::ceil((hi[a] - lo[a]) / voxel_size);
    if (cells > 4096.0) throw InvalidArgument("tsdf: bounds too large for the voxel size");
    dims[a] = static_cast<int>(cells) + 1;
  }
  return TsdfVolume(lo, voxel_size, dims, trunc);
}

DepthMap apply_mask(const DepthMap& depth, const Mask& mask) {
  if (!depth.same_shape(mask)) {
    throw InvalidArgument("apply_mask: depth is " + std::to_string(depth.width()) + "x" +
                          std::to_string(depth.height()) + " but mask is " + std::to_string(mask.width()) +
                          "x" + std::to_string(mask.height()));
  }
  DepthMap out = depth;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask[i] == 0) out[i] = 0.0;
  }
  return out;
}

void tsdf_integrate(TsdfVolume& volume, const DepthMap& depth, const Camera& camera) {
  camera.validate();
  if (depth.width() != camera.width || depth.height() != camera.height) {
    throw InvalidArgument("tsdf_integrate: depth map size does not match the camera");
  }
  const auto dims = volume.dims();
  const double trunc = volume.trunc();
  auto& tsdf = volume.tsdf_values();
  auto& weight = volume.weight_values();
  parallel_for(static_cast<std::size_t>(dims[2]), [&](std::size_t begin, std::size_t end) {
    for (std::size_t kk = begin; kk < end; ++kk) {
      const int k = static_cast<int>(kk);
      for (int j = 0; j < dims[1]; ++j) {
        for (int i = 0; i < dims[0]; ++i) {
          const Vec3 pc = camera.to_camera(volume.point(i, j, k));
          if (!(pc.z() > 0.0)) continue;
          const double fx = std::floor(camera.fx * pc.x() / pc.z() + camera.cx);
          const double fy = std::floor(camera.fy * pc.y() / pc.z() + camera.cy);
          if (!(fx >= 0.0 && fx < camera.width && fy >= 0.0 && fy < camera.height)) continue;
          const double d = depth(static_cast<int>(fx), static_cast<int>(fy));
          if (!(d > 0.0)) continue;
          const double sdf = d - pc.z();
          if (!(sdf > -trunc)) continue;
          const double sample = std::min(1.0, sdf / trunc);
          const std::size_t idx = volume.index(i, j, k);
          const double w = weight[idx];
          tsdf[idx] = (tsdf[idx] * w + sample) / (w + 1.0);
          weight[idx] = w + 1.0;
        }
      }
    }
  });
}

TriangleMesh reconstruct(const SplatScene& scene, const std::vector<Camera>& cameras,
                         const std::vector<Mask>& masks, const TsdfParams& params,
                         const RenderConfig& render) {
  if (scene.empty()) throw InvalidArgument("reconstruct: scene has no splats");
  if (!masks.empty() && masks.size() != cameras.size()) {
    throw InvalidArgument("reconstruct: " + std::to_string(masks.size()) + " masks for " +
                          std::to_string(cameras.size()) + " cameras");
  }
  if (!(params.padding >= 0.0)) throw InvalidArgument("reconstruct: padding must be >= 0");
  Vec3 lo = scene.splats[0].center, hi = lo;
  for (const Splat2D& s : scene.splats) {
    lo = lo.cwiseMin(s.center);
    hi = hi.cwiseMax(s.center);
  }
  const Vec3 pad = (hi - lo) * params.padding + Vec3::Constant(params.voxel_size);
  const double trunc = params.trunc > 0.0 ? params.trunc : 4.0 * params.voxel_size;
  TsdfVolume volume = TsdfVolume::from_bounds(lo - pad, hi + pad, params.voxel_size, trunc);
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    const RenderBuffers buf = render_view(scene, cameras[v], render, false);
    const DepthMap depth = masks.empty() ? buf.depth : apply_mask(buf.depth, masks[v]);
    tsdf_integrate(volume, depth, cameras[v]);
  }
  TriangleMesh mesh = marching_cubes(volume);
  if (mesh.empty()) spdlog::warn("reconstruct: extracted mesh is empty");
  return mesh;
}

}  // namespace s2dgs
