// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "sparse2dgs/error.hpp"
#include "sparse2dgs/eval.hpp"
#include "sparse2dgs/surface.hpp"
#include "sparse2dgs/synth.hpp"
#include "test_util.hpp"

namespace s2dgs {
namespace {

Camera front_camera(int size) {
  Camera c;
  c.fx = c.fy = size * 1.2;
  c.cx = c.cy = size / 2.0;
  c.width = c.height = size;
  c.world_to_camera = look_at(Vec3(0, 0, -3), Vec3(0, 0, 0), Vec3(0, -1, 0));
  return c;
}

TEST(Tsdf, PlaneMatchesPointwiseOracle) {
  const Camera cam = front_camera(16);
  TsdfVolume vol(Vec3(-0.3, -0.3, -0.3), 0.05, {13, 13, 13}, 0.2);
  DepthMap depth(16, 16, 3.0);  // the z = 0 world plane
  depth(0, 0) = 0.0;
  tsdf_integrate(vol, depth, cam);
  int observed = 0;
  for (int k = 0; k < 13; ++k) {
    for (int j = 0; j < 13; ++j) {
      for (int i = 0; i < 13; ++i) {
        const Vec3 pc = cam.to_camera(vol.point(i, j, k));
        const int px = static_cast<int>(std::floor(cam.fx * pc.x() / pc.z() + cam.cx));
        const int py = static_cast<int>(std::floor(cam.fy * pc.y() / pc.z() + cam.cy));
        double expect_w = 0.0, expect_v = 1.0;
        if (px >= 0 && py >= 0 && px < 16 && py < 16 && depth(px, py) > 0.0) {
          const double sdf = depth(px, py) - pc.z();
          if (sdf > -0.2) {
            expect_w = 1.0;
            expect_v = std::min(1.0, sdf / 0.2);
          }
        }
        EXPECT_EQ(vol.weight(i, j, k), expect_w);
        EXPECT_NEAR(vol.tsdf(i, j, k), expect_v, 1e-12);
        observed += expect_w > 0.0;
      }
    }
  }
  EXPECT_GT(observed, 500);
}

TEST(Tsdf, FrontoPlaneCrossesZeroAtItsDepth) {
  Camera cam;
  cam.fx = cam.fy = 16.0;
  cam.cx = cam.cy = 8.0;
  cam.width = cam.height = 16;
  const double voxel = 0.03;
  TsdfVolume vol(Vec3(-0.09, -0.09, 0.513), voxel, {7, 7, 30}, 4.0 * voxel);
  tsdf_integrate(vol, DepthMap(16, 16, 1.0), cam);
  // Column through the optical axis: i = j = 3 is x = y = 0.
  int crossings = 0;
  for (int k = 0; k + 1 < 30; ++k) {
    const double a = vol.tsdf(3, 3, k), b = vol.tsdf(3, 3, k + 1);
    if (vol.weight(3, 3, k) > 0.0 && vol.weight(3, 3, k + 1) > 0.0 && a > 0.0 && b <= 0.0) {
      const double z = vol.point(3, 3, k).z() + voxel * a / (a - b);
      EXPECT_NEAR(z, 1.0, voxel / 2.0);
      ++crossings;
    }
  }
  EXPECT_EQ(crossings, 1);
}

TEST(Tsdf, RepeatedIntegrationAverages) {
  const Camera cam = front_camera(16);
  TsdfVolume once(Vec3(-0.3, -0.3, -0.3), 0.05, {13, 13, 13}, 0.2);
  TsdfVolume twice = once;
  const DepthMap depth(16, 16, 3.0);
  tsdf_integrate(once, depth, cam);
  tsdf_integrate(twice, depth, cam);
  tsdf_integrate(twice, depth, cam);
  for (std::size_t i = 0; i < once.size(); ++i) {
    EXPECT_NEAR(twice.tsdf_values()[i], once.tsdf_values()[i], 1e-15);
    EXPECT_EQ(twice.weight_values()[i], 2.0 * once.weight_values()[i]);
  }
  TsdfVolume mixed = once;
  tsdf_integrate(mixed, DepthMap(16, 16, 3.1), cam);
  const Vec3 p = mixed.point(6, 6, 6);  // world origin, camera depth 3
  ASSERT_LT((p - Vec3::Zero()).norm(), 1e-12);
  EXPECT_NEAR(mixed.tsdf(6, 6, 6), 0.5 * (0.0 + 0.1 / 0.2), 1e-12);
}

TEST(Tsdf, MaskRemovesDepth) {
  DepthMap d(3, 2, 1.0);
  Mask m(3, 2, 1);
  m(1, 0) = 0;
  const DepthMap out = apply_mask(d, m);
  EXPECT_EQ(out(1, 0), 0.0);
  EXPECT_EQ(out(0, 0), 1.0);
  EXPECT_THROW(apply_mask(d, Mask(2, 2, 1)), InvalidArgument);
}

TEST(Tsdf, FromBoundsCoversBox) {
  const TsdfVolume v = TsdfVolume::from_bounds(Vec3(-1, -0.5, 0), Vec3(1, 0.5, 0.25), 0.1, 0.4);
  EXPECT_EQ(v.dims()[0], 21);
  EXPECT_EQ(v.dims()[1], 11);
  EXPECT_EQ(v.dims()[2], 4);
  EXPECT_EQ(v.weight(3, 3, 3), 0.0);
  EXPECT_EQ(v.tsdf(3, 3, 3), 1.0);
  EXPECT_THROW(TsdfVolume::from_bounds(Vec3(1, 0, 0), Vec3(0, 0, 0), 0.1, 0.4), InvalidArgument);
}

TsdfVolume sphere_volume(double radius, double voxel) {
  const double trunc = 4.0 * voxel;
  TsdfVolume v = TsdfVolume::from_bounds(Vec3::Constant(-radius - 0.1), Vec3::Constant(radius + 0.1), voxel, trunc);
  for (int k = 0; k < v.dims()[2]; ++k) {
    for (int j = 0; j < v.dims()[1]; ++j) {
      for (int i = 0; i < v.dims()[0]; ++i) {
        const double sdf = v.point(i, j, k).norm() - radius;
        v.tsdf_values()[v.index(i, j, k)] = std::clamp(sdf / trunc, -1.0, 1.0);
        v.weight_values()[v.index(i, j, k)] = 1.0;
      }
    }
  }
  return v;
}

TEST(MarchingCubes, SphereSdfWithinHalfVoxel) {
  const TriangleMesh m = marching_cubes(sphere_volume(0.5, 0.05));
  ASSERT_FALSE(m.empty());
  EXPECT_NO_THROW(m.validate());
  for (const Vec3& p : m.vertices) EXPECT_NEAR(p.norm(), 0.5, 0.05);
}

TEST(MarchingCubes, ClosedManifoldWithOutwardWinding) {
  // Radius off the grid: no SDF zero lands exactly on a corner, where several
  // edges would share one crossing point.
  const TriangleMesh m = marching_cubes(sphere_volume(0.513, 0.05));
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
  double signed_volume = 0.0;
  for (const auto& t : m.triangles) {
    for (int e = 0; e < 3; ++e) {
      const std::uint32_t a = t[e], b = t[(e + 1) % 3];
      ++edges[{std::min(a, b), std::max(a, b)}];
    }
    signed_volume += m.vertices[t[0]].dot(m.vertices[t[1]].cross(m.vertices[t[2]])) / 6.0;
  }
  for (const auto& [edge, count] : edges) EXPECT_EQ(count, 2);
  // Enclosed volume close to 4/3 pi r^3, with a consistent orientation.
  EXPECT_NEAR(std::abs(signed_volume), 4.0 / 3.0 * 3.14159265358979 * 0.513 * 0.513 * 0.513, 0.01);
  // No duplicated vertices.
  std::vector<Vec3> v = m.vertices;
  std::sort(v.begin(), v.end(), [](const Vec3& a, const Vec3& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  });
  EXPECT_EQ(std::adjacent_find(v.begin(), v.end()), v.end());
}

TEST(MarchingCubes, SkipsCellsWithUnobservedCorners) {
  TsdfVolume v = sphere_volume(0.5, 0.05);
  const std::size_t full = marching_cubes(v).triangles.size();
  for (int k = 0; k < v.dims()[2]; ++k) {
    for (int j = 0; j < v.dims()[1]; ++j) {
      for (int i = 0; i < v.dims()[0]; ++i) {
        if (v.point(i, j, k).z() > 0.0) v.weight_values()[v.index(i, j, k)] = 0.0;
      }
    }
  }
  const TriangleMesh half = marching_cubes(v);
  EXPECT_LT(half.triangles.size(), full);
  EXPECT_GT(half.triangles.size(), full / 3);
  for (const Vec3& p : half.vertices) EXPECT_LE(p.z(), 1e-12);
  std::fill(v.weight_values().begin(), v.weight_values().end(), 0.0);
  EXPECT_TRUE(marching_cubes(v).empty());
}

TEST(MarchingCubes, AxisAlignedPlaneIsExact) {
  TsdfVolume v(Vec3::Zero(), 0.1, {6, 6, 6}, 0.4);
  for (int k = 0; k < 6; ++k) {
    for (int j = 0; j < 6; ++j) {
      for (int i = 0; i < 6; ++i) {
        v.tsdf_values()[v.index(i, j, k)] = (v.point(i, j, k).z() - 0.23) / 0.4;
        v.weight_values()[v.index(i, j, k)] = 1.0;
      }
    }
  }
  const TriangleMesh m = marching_cubes(v);
  EXPECT_EQ(m.triangles.size(), 2u * 5 * 5);
  for (const Vec3& p : m.vertices) EXPECT_NEAR(p.z(), 0.23, 1e-12);
}

TEST(Reconstruct, GroundTruthSplatsGiveSphere) {
  const SyntheticScene s = make_scene(ShapeKind::sphere, 32, 0);
  TsdfParams p;
  p.voxel_size = 0.04;
  const TriangleMesh m = reconstruct(s.gt_splats, s.cameras, s.masks, p);
  ASSERT_FALSE(m.empty());
  double mean = 0.0;
  for (const Vec3& v : m.vertices) mean += std::abs(v.norm() - 1.0);
  mean /= static_cast<double>(m.vertices.size());
  EXPECT_LT(mean, 0.03);
  EXPECT_LT(chamfer_distance(sample_mesh(m, 100000), s.gt_surface_points).cd, 2.0 * p.voxel_size);
  EXPECT_THROW(reconstruct(SplatScene{}, s.cameras, s.masks, p), InvalidArgument);
  std::vector<Mask> one{s.masks[0]};
  EXPECT_THROW(reconstruct(s.gt_splats, s.cameras, one, p), InvalidArgument);
}

}  // namespace
}  // namespace s2dgs
