// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "sparse2dgs/error.hpp"
#include "sparse2dgs/eval.hpp"
#include "sparse2dgs/pointcloud.hpp"
#include "sparse2dgs/synth.hpp"

namespace s2dgs {
namespace {

TEST(Shape, SurfaceSamplesAndIntersections) {
  for (ShapeKind kind : {ShapeKind::sphere, ShapeKind::plane, ShapeKind::two_spheres}) {
    const Shape shape(kind, 1);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
      const Vec3 p = shape.sample(rng);
      EXPECT_NEAR(shape.surface_residual(p), 0.0, 1e-12);
      EXPECT_LE(p.norm(), shape.radius() + 1e-12);
      EXPECT_NEAR(shape.normal(p).norm(), 1.0, 1e-12);
      const Vec3 t = shape.texture(p);
      EXPECT_GE(t.minCoeff(), 0.0);
      EXPECT_LE(t.maxCoeff(), 1.0);
      // A ray from outside aimed at the sample along the normal hits it.
      const Vec3 origin = p + 3.0 * shape.normal(p);
      const auto hit = shape.intersect(Ray{origin, -shape.normal(p)});
      ASSERT_TRUE(hit.has_value());
      EXPECT_LE(*hit, 3.0 + 1e-9);
    }
    EXPECT_EQ(parse_shape_kind(shape_kind_name(kind)), kind);
  }
  EXPECT_THROW(parse_shape_kind("cube"), InvalidArgument);
}

TEST(Shape, SphereNormalIsOutward) {
  const Shape s(ShapeKind::sphere, 0);
  EXPECT_LT((s.normal(Vec3(0, 0, 1)) - Vec3(0, 0, 1)).norm(), 1e-12);
  EXPECT_NEAR(*s.intersect(Ray{Vec3(0, 0, -3), Vec3(0, 0, 1)}), 2.0, 1e-12);
  EXPECT_FALSE(s.intersect(Ray{Vec3(0, 2, -3), Vec3(0, 0, 1)}).has_value());
}

TEST(Scene, Construction) {
  const SyntheticScene s = make_scene(ShapeKind::sphere, 24, 5);
  ASSERT_EQ(s.cameras.size(), 3u);
  ASSERT_EQ(s.gt_images.size(), 3u);
  ASSERT_EQ(s.masks.size(), 3u);
  for (std::size_t v = 0; v < 3; ++v) {
    const Camera& c = s.cameras[v];
    EXPECT_EQ(c.width, 24);
    EXPECT_NEAR(c.center().norm(), 3.0, 1e-12);
    EXPECT_LT((c.optical_axis() + c.center().normalized()).norm(), 1e-12);
    EXPECT_NEAR(2.0 * std::atan(12.0 / c.fx) * 180.0 / 3.14159265358979, 50.0, 1e-9);
    int fg = 0;
    for (int y = 0; y < 24; ++y) {
      for (int x = 0; x < 24; ++x) {
        if (s.masks[v](x, y)) {
          ++fg;
        } else {
          // Background pixels far from the silhouette render black.
          bool near_fg = false;
          for (int dy = -2; dy <= 2; ++dy)
            for (int dx = -2; dx <= 2; ++dx) {
              const int xx = x + dx, yy = y + dy;
              if (xx >= 0 && yy >= 0 && xx < 24 && yy < 24 && s.masks[v](xx, yy)) near_fg = true;
            }
          if (!near_fg) EXPECT_LT(s.gt_images[v](x, y).norm(), 1e-9);
        }
      }
    }
    EXPECT_GT(fg, 100);
    EXPECT_LT(fg, 24 * 24);
  }
  const double a0 = s.cameras[0].center().head<2>().norm();
  EXPECT_NEAR(std::atan2(s.cameras[1].center().y(), s.cameras[1].center().x()), 2.0 * 3.14159265358979 / 3.0, 1e-9);
  EXPECT_GT(a0, 0.0);
  for (const Vec3& p : s.gt_surface_points.points) {
    EXPECT_NEAR(p.norm(), 1.0, 1e-12);
    EXPECT_TRUE(s.visible(p));
  }
  EXPECT_FALSE(s.visible(Vec3(0, 0, -1)) && s.visible(Vec3(0, 0, 1)) && s.visible(Vec3(-1, 0, 0)) &&
               s.visible(Vec3(1, 0, 0)) && s.visible(Vec3(0, 1, 0)) && s.visible(Vec3(0, -1, 0)));
  EXPECT_THROW(make_scene(ShapeKind::sphere, 8, 0), InvalidArgument);
}

TEST(Scene, Deterministic) {
  const SyntheticScene a = make_scene(ShapeKind::two_spheres, 16, 9);
  const SyntheticScene b = make_scene(ShapeKind::two_spheres, 16, 9);
  EXPECT_EQ(a.gt_images, b.gt_images);
  EXPECT_EQ(a.masks, b.masks);
  EXPECT_EQ(a.gt_surface_points.points, b.gt_surface_points.points);
  EXPECT_EQ(a.dense_noisy(0.02).points, b.dense_noisy(0.02).points);
  EXPECT_EQ(a.sparse().points, b.sparse().points);
  const SyntheticScene c = make_scene(ShapeKind::two_spheres, 16, 10);
  EXPECT_NE(a.dense_clean().points, c.dense_clean().points);
}

TEST(Scene, InitializationClouds) {
  const SyntheticScene s = make_scene(ShapeKind::sphere, 16, 2);
  const PointCloud clean = s.dense_clean(500);
  ASSERT_EQ(clean.size(), 500u);
  ASSERT_TRUE(clean.has_normals());
  ASSERT_TRUE(clean.has_colors());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    EXPECT_NEAR(clean.points[i].norm(), 1.0, 1e-12);
    EXPECT_TRUE(s.visible(clean.points[i]));
    EXPECT_LT((clean.normals[i] - clean.points[i]).norm(), 1e-12);
  }
  const PointCloud noisy = s.dense_noisy(0.02, 500);
  double var = 0.0;
  for (std::size_t i = 0; i < 500; ++i) var += (noisy.points[i] - clean.points[i]).squaredNorm();
  EXPECT_NEAR(std::sqrt(var / 1500.0), 0.02, 0.003);
  EXPECT_EQ(s.sparse().size(), 100u);
  const PointCloud out = s.with_outliers(0.05, 2.0, 500);
  ASSERT_EQ(out.size(), 525u);
  for (std::size_t i = 500; i < 525; ++i) {
    EXPECT_GE(out.points[i].norm(), 2.0 - 1e-12);
    EXPECT_LE(out.points[i].norm(), 3.0 + 1e-12);
  }
  EXPECT_THROW(s.dense_noisy(-1.0), InvalidArgument);
}

TEST(Scene, PlantedOutliersAreFarOut) {
  const SyntheticScene s = make_scene(ShapeKind::sphere, 16, 3);
  const std::size_t n = 333;
  const PointCloud out = s.with_outliers(0.1, 10.0, n);
  const auto planted = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n)));
  ASSERT_EQ(out.size(), n + planted);
  for (std::size_t i = n; i < out.size(); ++i) EXPECT_GE(out.points[i].norm(), 10.0 - 1e-12);
}

TEST(Scene, DenseCleanIsCloserToTruthThanSparse) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const SyntheticScene s = make_scene(ShapeKind::sphere, 16, seed);
    EXPECT_LT(chamfer_distance(s.dense_clean(), s.gt_surface_points).cd,
              chamfer_distance(s.sparse(100), s.gt_surface_points).cd);
  }
}

TEST(Scene, MisalignedPair) {
  const SyntheticScene s = make_scene(ShapeKind::plane, 16, 0);
  const RigidTransform t = RigidTransform::from_axis_angle(Vec3(0, 0, 1), 0.2, Vec3(0.1, 0, 0));
  const auto [a, b] = make_misaligned_pair(s, t);
  ASSERT_EQ(a.size(), 500u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT((t.apply(a.points[i]) - b.points[i]).norm(), 1e-15);
  MisalignOptions o;
  o.disjoint = true;
  o.noise = 0.01;
  const auto [c, d] = make_misaligned_pair(s, t, o);
  EXPECT_NE(c.points[0], t.inverse().apply(d.points[0]));
}

TEST(Scene, IcpAlignsIndependentSphereSamples) {
  // A sphere fixes no rotation; convergence means the moved cloud lands back
  // on the surface with its center at the origin. With independent samples the
  // center is only pinned to about 0.02 even when ICP starts at the true pose.
  const SyntheticScene s = make_scene(ShapeKind::sphere, 16, 0);
  FusionParams params;
  params.icp_max_corr_dist = 2.0;
  params.icp_max_iters = 100;
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Vec3 axis = Vec3(u(rng), u(rng), u(rng)).normalized();
    const RigidTransform t =
        RigidTransform::from_axis_angle(axis, std::abs(u(rng)) * 30.0 * std::numbers::pi / 180.0,
                                        0.5 * Vec3(u(rng), u(rng), u(rng)) / std::sqrt(3.0));
    MisalignOptions o;
    o.disjoint = true;
    o.seed = seed;
    const auto [a, b] = make_misaligned_pair(s, t, o);
    const IcpResult r = icp_align(b, a, params);
    EXPECT_LT(r.transform.apply(t.translation()).norm(), 0.03) << "seed " << seed;
    double worst = 0.0;
    for (const Vec3& p : b.points) worst = std::max(worst, std::abs(r.transform.apply(p).norm() - 1.0));
    EXPECT_LT(worst, 0.03) << "seed " << seed;
  }
}

TEST(GradFixture, Shape) {
  const GradFixture f = make_grad_fixture(3);
  EXPECT_EQ(f.scene.size(), 8u);
  ASSERT_EQ(f.cameras.size(), 2u);
  ASSERT_EQ(f.images.size(), 2u);
  EXPECT_EQ(f.images[0].width(), 16);
  for (const Splat2D& s : f.scene.splats) {
    EXPECT_LE(std::acos(std::clamp(-s.normal().z(), -1.0, 1.0)), 1.0 + 1e-12);
  }
  EXPECT_EQ(flatten_parameters(make_grad_fixture(3).scene), flatten_parameters(f.scene));
  EXPECT_THROW(make_grad_fixture(0, GradFixtureOptions{0, 16, 2, 1.0}), InvalidArgument);
}

}  // namespace
}  // namespace s2dgs
