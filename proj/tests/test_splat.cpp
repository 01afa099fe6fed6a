// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sparse2dgs/error.hpp"
#include "sparse2dgs/splat.hpp"
#include "test_util.hpp"

namespace s2dgs {
namespace {

TEST(Splat, SigmoidLogitInverse) {
  for (double p : {1e-6, 0.1, 0.5, 0.9, 1.0 - 1e-6}) EXPECT_NEAR(sigmoid(logit(p)), p, 1e-12);
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_GT(sigmoid(800.0), 0.0);
  EXPECT_LT(sigmoid(-800.0), 1e-300);
}

TEST(Splat, QuaternionRoundTrip) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat3 r = test::random_transform(rng, 3.14159, 0.0).rotation();
    const Vec4 q = quaternion_from_rotation(r);
    EXPECT_NEAR(q.norm(), 1.0, 1e-12);
    EXPECT_GE(q[0], 0.0);
    EXPECT_LT((rotation_from_quaternion(q) - r).norm(), 1e-12);
  }
}

TEST(Splat, QuaternionIsNormalizedBeforeUse) {
  const Vec4 q(2.0, 0.0, 0.0, 0.0);
  EXPECT_LT((rotation_from_quaternion(q) - Mat3::Identity()).norm(), 1e-15);
  const Vec4 z90(std::cos(0.25 * 3.141592653589793), 0, 0, std::sin(0.25 * 3.141592653589793));
  EXPECT_LT((rotation_from_quaternion(3.0 * z90) * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm(), 1e-12);
}

TEST(Splat, FrameFromNormal) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 n = test::random_unit(rng);
    const Mat3 f = frame_from_normal(n);
    EXPECT_TRUE(is_rotation(f, 1e-12));
    EXPECT_LT((f.col(2) - n).norm(), 1e-12);
  }
  EXPECT_TRUE(is_rotation(frame_from_normal(Vec3(0, 0, -1)), 1e-12));
}

TEST(Splat, DecodedQuantities) {
  const Mat3 f = frame_from_normal(Vec3(0, 1, 0));
  const Splat2D s = Splat2D::from_decoded(Vec3(1, 2, 3), f, 0.5, 0.25, 0.3, Vec3(0.2, 0.4, 0.6));
  EXPECT_LT((s.normal() - Vec3(0, 1, 0)).norm(), 1e-12);
  EXPECT_NEAR(s.normal().dot(s.tangent_u().cross(s.tangent_v())), 1.0, 1e-12);
  EXPECT_NEAR(s.scales().x(), 0.5, 1e-15);
  EXPECT_NEAR(s.scales().y(), 0.25, 1e-15);
  EXPECT_NEAR(s.opacity(), 0.3, 1e-15);
  const Vec3 p = splat_point(s, 1.0, -2.0);
  EXPECT_LT((p - (Vec3(1, 2, 3) + 0.5 * s.tangent_u() - 0.5 * s.tangent_v())).norm(), 1e-15);
  const Vec3 corner = splat_point(s, 1.0, 1.0);
  const Vec3 tu = f.col(0), tv = f.col(1);
  EXPECT_LT((corner - (Vec3(1, 2, 3) + 0.5 * tu + 0.25 * tv)).norm(), 1e-12);
  EXPECT_NEAR(gaussian_value(1.0, 2.0), std::exp(-2.5), 1e-16);
  EXPECT_THROW(Splat2D::from_decoded(Vec3::Zero(), f, 0.0, 1.0, 0.5, Vec3::Zero()), InvalidArgument);
  EXPECT_THROW(Splat2D::from_decoded(Vec3::Zero(), f, 1.0, 1.0, 1.0, Vec3::Zero()), InvalidArgument);
}

SplatScene random_scene(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SplatScene scene;
  scene.background = Vec3(0.1, 0.2, 0.3);
  for (std::size_t i = 0; i < n; ++i) {
    Splat2D s;
    s.center = test::random_vec(rng, 2.0);
    s.rotation = Vec4(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5) * 3.0;
    s.log_scales = Vec2(std::log(0.01 + u(rng)), std::log(0.01 + u(rng)));
    s.opacity_logit = 8.0 * (u(rng) - 0.5);
    s.color = Vec3(1.4 * u(rng) - 0.2, u(rng), u(rng));
    scene.splats.push_back(s);
  }
  return scene;
}

TEST(Splat, FlattenRoundTrip) {
  const SplatScene scene = random_scene(7, 3);
  const std::vector<double> p = flatten_parameters(scene);
  ASSERT_EQ(p.size(), 7u * kParamsPerSplat);
  EXPECT_EQ(p[kParamsPerSplat + kOpacityLogit], scene.splats[1].opacity_logit);
  EXPECT_EQ(p[2 * kParamsPerSplat + kColor + 2], scene.splats[2].color.z());
  SplatScene other = random_scene(7, 4);
  unflatten_parameters(p, other);
  EXPECT_EQ(flatten_parameters(other), p);
  std::vector<double> short_params(p.begin(), p.end() - 1);
  EXPECT_THROW(unflatten_parameters(short_params, other), InvalidArgument);
}

TEST(Splat, SceneValidate) {
  SplatScene scene = random_scene(3, 5);
  EXPECT_NO_THROW(scene.validate());
  scene.splats[1].rotation = Vec4::Zero();
  EXPECT_THROW(scene.validate(), InvalidArgument);
  scene = random_scene(3, 5);
  scene.splats[2].center.x() = NAN;
  EXPECT_THROW(scene.validate(), InvalidArgument);
}

TEST(Splat, CheckpointRoundTrip) {
  test::TempDir dir;
  const SplatScene scene = random_scene(25, 6);
  save_checkpoint(scene, dir.path() / "a.ckpt");
  const SplatScene back = load_checkpoint(dir.path() / "a.ckpt");
  ASSERT_EQ(back.size(), scene.size());
  EXPECT_EQ(back.background, scene.background);
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Splat2D& a = scene.splats[i];
    const Splat2D& b = back.splats[i];
    EXPECT_EQ(b.center, a.center);
    EXPECT_EQ(b.color, a.color);
    EXPECT_LT((b.frame() - a.frame()).norm(), 1e-14);
    EXPECT_LT((b.scales() - a.scales()).norm(), 1e-14 * a.scales().norm());
    EXPECT_NEAR(b.opacity(), a.opacity(), 1e-15);
  }
  // A loaded scene saves back to the same bytes.
  save_checkpoint(back, dir.path() / "b.ckpt");
  save_checkpoint(load_checkpoint(dir.path() / "b.ckpt"), dir.path() / "c.ckpt");
  EXPECT_EQ(test::read_bytes(dir.path() / "b.ckpt"), test::read_bytes(dir.path() / "c.ckpt"));
}

TEST(Splat, CheckpointErrors) {
  test::TempDir dir;
  EXPECT_THROW(load_checkpoint(dir.path() / "none.ckpt"), IoError);
  test::write_text(dir.path() / "bad.ckpt", "S2DGSXXX01234567");
  EXPECT_THROW(load_checkpoint(dir.path() / "bad.ckpt"), ParseError);
  save_checkpoint(random_scene(4, 7), dir.path() / "a.ckpt");
  std::string bytes = test::read_bytes(dir.path() / "a.ckpt");
  test::write_text(dir.path() / "trunc.ckpt", bytes.substr(0, bytes.size() - 9));
  EXPECT_THROW(load_checkpoint(dir.path() / "trunc.ckpt"), ParseError);
}

// O(n^2) oracle for the initial scale of every splat.
std::vector<double> brute_force_mean_knn(const std::vector<Vec3>& pts, int k) {
  std::vector<double> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j != i) d.push_back((pts[i] - pts[j]).norm());
    }
    std::sort(d.begin(), d.end());
    double s = 0.0;
    for (int m = 0; m < k; ++m) s += d[m];
    out.push_back(s / k);
  }
  return out;
}

TEST(InitSplats, MatchesBruteForceKnnScales) {
  std::mt19937_64 rng(8);
  PointCloud cloud;
  for (int i = 0; i < 1000; ++i) cloud.points.push_back(test::random_vec(rng, 0.5) + Vec3::Constant(0.5));
  InitOptions options;
  const SplatScene scene = init_splats(cloud, options);
  const std::vector<double> oracle = brute_force_mean_knn(cloud.points, options.knn_k);
  ASSERT_EQ(scene.size(), cloud.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Splat2D& s = scene.splats[i];
    EXPECT_EQ(s.center, cloud.points[i]);
    EXPECT_NEAR(s.scales().x(), oracle[i], 1e-12);
    EXPECT_NEAR(s.scales().y(), oracle[i], 1e-12);
    EXPECT_NEAR(s.opacity(), 0.1, 1e-12);
    EXPECT_EQ(s.color, Vec3::Constant(0.5));
    EXPECT_NEAR(s.rotation.norm(), 1.0, 1e-12);
  }
}

TEST(InitSplats, UsesNormalsAndColors) {
  PointCloud cloud;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20; ++i) {
    cloud.points.push_back(test::random_vec(rng, 1.0));
    cloud.normals.push_back(test::random_unit(rng));
    cloud.colors.push_back(Vec3(0.1, 0.2, i / 20.0));
  }
  InitOptions options;
  options.opacity = 0.4;
  options.background = Vec3(1, 1, 1);
  const SplatScene scene = init_splats(cloud, options);
  EXPECT_EQ(scene.background, Vec3(1, 1, 1));
  for (std::size_t i = 0; i < scene.size(); ++i) {
    EXPECT_LT((scene.splats[i].normal() - cloud.normals[i]).norm(), 1e-12);
    EXPECT_EQ(scene.splats[i].color, cloud.colors[i]);
    EXPECT_NEAR(scene.splats[i].opacity(), 0.4, 1e-12);
  }
}

TEST(InitSplats, RandomOrientationIsSeeded) {
  PointCloud cloud;
  std::mt19937_64 rng(10);
  for (int i = 0; i < 10; ++i) cloud.points.push_back(test::random_vec(rng, 1.0));
  InitOptions a;
  a.seed = 1;
  InitOptions b = a;
  InitOptions c = a;
  c.seed = 2;
  EXPECT_EQ(flatten_parameters(init_splats(cloud, a)), flatten_parameters(init_splats(cloud, b)));
  EXPECT_NE(flatten_parameters(init_splats(cloud, a)), flatten_parameters(init_splats(cloud, c)));
}

TEST(InitSplats, TooFewPoints) {
  PointCloud cloud;
  cloud.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  EXPECT_THROW(init_splats(cloud), InvalidArgument);
  cloud.points.push_back(Vec3(0, 0, 1));
  EXPECT_EQ(init_splats(cloud).size(), 4u);
}

}  // namespace
}  // namespace s2dgs
