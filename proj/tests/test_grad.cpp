// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sparse2dgs/error.hpp"
#include "sparse2dgs/grad.hpp"
#include "sparse2dgs/synth.hpp"
#include "test_util.hpp"

namespace s2dgs {
namespace {

Objective objective_of(const GradFixture& f) {
  Objective o;
  o.cameras = f.cameras;
  o.images = f.images;
  return o;
}

TEST(CheckGradient, QuadraticToy) {
  // f(x) = 0.5 x^T A x + b^T x has gradient A x + b; central differences are
  // exact for quadratics up to rounding.
  Eigen::Matrix3d a;
  a << 4, 1, 0, 1, 3, -1, 0, -1, 2;
  const Vec3 b(0.5, -1.0, 2.0);
  const auto f = [&](std::span<const double> x) {
    const Vec3 v(x[0], x[1], x[2]);
    return 0.5 * v.dot(a * v) + b.dot(v);
  };
  const std::vector<double> x{0.3, -0.7, 1.1};
  const Vec3 g = a * Vec3(x[0], x[1], x[2]) + b;
  std::vector<double> good{g[0], g[1], g[2]};
  const GradCheckResult ok = check_gradient(f, x, good, GradCheckOptions{});
  EXPECT_EQ(ok.checked, 3u);
  EXPECT_LT(ok.max_error, 1e-8);
  std::vector<double> bad = good;
  bad[1] *= 1.01;
  const GradCheckResult wrong = check_gradient(f, x, bad, GradCheckOptions{});
  EXPECT_EQ(wrong.worst_param, 1u);
  EXPECT_NEAR(wrong.max_error, 0.01 / 1.01, 1e-6);
  GradCheckOptions only;
  only.params = {2};
  const GradCheckResult one = check_gradient(f, x, bad, only);
  EXPECT_EQ(one.entries.size(), 1u);
  EXPECT_LT(one.max_error, 1e-8);
  const GradCheckResult skip =
      check_gradient(f, x, bad, GradCheckOptions{}, [](std::span<const double> p) { return p[1] != -0.7; });
  EXPECT_EQ(skip.skipped, 2u);
  EXPECT_GT(skip.max_error, 0.009);
}

TEST(CheckGradient, AbsoluteFloor) {
  const auto f = [](std::span<const double>) { return 1.0; };
  const std::vector<double> x{0.0};
  const std::vector<double> g{5e-9};
  EXPECT_EQ(check_gradient(f, x, g, GradCheckOptions{}).max_error, 0.0);
}

TEST(Backward, LossMatchesEvaluateLoss) {
  const GradFixture f = make_grad_fixture(1);
  const Objective o = objective_of(f);
  const BackwardResult r = backward(f.scene, o);
  const LossReport e = evaluate_loss(f.scene, o);
  EXPECT_NEAR(r.report.total, e.total, 1e-12);
  EXPECT_NEAR(r.report.distortion, e.distortion, 1e-14);
  EXPECT_NEAR(r.report.normal, e.normal, 1e-14);
  EXPECT_EQ(r.gradients.splat_count(), f.scene.size());
}

TEST(Backward, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    const GradFixture f = make_grad_fixture(seed);
    const GradCheckResult r = finite_diff_check(f.scene, objective_of(f));
    EXPECT_LT(r.max_error, 1e-5) << "seed " << seed << " worst param " << r.worst_param;
    EXPECT_GT(r.checked, r.skipped);
  }
}

TEST(Backward, MatchesFiniteDifferencesOnSixSplatFixture) {
  const GradFixture f = make_grad_fixture(21, GradFixtureOptions{6, 12, 2, 1.0});
  const GradCheckResult r = finite_diff_check(f.scene, objective_of(f));
  EXPECT_EQ(r.checked + r.skipped, 6u * kParamsPerSplat);
  EXPECT_LT(r.max_error, 1e-5) << "worst param " << r.worst_param;
}

TEST(Backward, CutoffCrossingIsSkipped) {
  Camera cam;
  cam.fx = cam.fy = 9.6;
  cam.cx = cam.cy = 4.0;
  cam.width = cam.height = 8;
  cam.world_to_camera = look_at(Vec3(0, 0, -3), Vec3::Zero(), Vec3(0, -1, 0));
  // Pixel (4, 4) hits the z = 0 plane at `hit`; place the splat so that this
  // point sits at u just below 3 (the 3-sigma cutoff), v = 0.
  const Ray ray = pixel_to_ray(cam, 4, 4);
  const Vec3 hit = ray.origin - ray.origin.z() / ray.direction.z() * ray.direction;
  const double scale = 0.3;
  const Vec3 center(hit.x() - (3.0 - 1e-7) * scale, hit.y(), 0.0);
  SplatScene scene;
  scene.splats.push_back(test::facing_splat(center, scale, 0.7, Vec3(0.3, 0.5, 0.7)));
  const Objective o{{cam}, {ImageRGB(8, 8, Vec3(0.5, 0.5, 0.5))}, {}, {}};
  const GradCheckResult r = finite_diff_check(scene, o);
  ASSERT_EQ(r.entries.size(), static_cast<std::size_t>(kParamsPerSplat));
  EXPECT_TRUE(r.entries[kCenter].skipped);
  EXPECT_GE(r.skipped, 1u);
  EXPECT_LT(r.max_error, 1e-5);
}

TEST(Backward, MatchesFiniteDifferencesWithoutRegularizers) {
  const GradFixture f = make_grad_fixture(7);
  Objective o = objective_of(f);
  o.weights.alpha = 0.0;
  o.weights.beta = 0.0;
  EXPECT_LT(finite_diff_check(f.scene, o).max_error, 1e-5);
}

TEST(Backward, LinearInRegularizerWeights) {
  const GradFixture f = make_grad_fixture(3);
  Objective o = objective_of(f);
  o.weights.alpha = 0.0;
  o.weights.beta = 0.0;
  const std::vector<double> g0 = backward(f.scene, o).gradients.values;
  o.weights.alpha = 10.0;
  const std::vector<double> ga = backward(f.scene, o).gradients.values;
  o.weights.alpha = 0.0;
  o.weights.beta = 0.5;
  const std::vector<double> gb = backward(f.scene, o).gradients.values;
  o.weights.alpha = 20.0;
  o.weights.beta = 1.5;
  const std::vector<double> gab = backward(f.scene, o).gradients.values;
  for (std::size_t i = 0; i < g0.size(); ++i) {
    const double expect = g0[i] + 2.0 * (ga[i] - g0[i]) + 3.0 * (gb[i] - g0[i]);
    EXPECT_NEAR(gab[i], expect, 1e-10 * (1.0 + std::abs(expect)));
  }
}

TEST(Backward, InvisibleSplatHasZeroGradient) {
  GradFixture f = make_grad_fixture(4);
  Splat2D far = f.scene.splats[0];
  far.center = Vec3(100.0, 100.0, 100.0);
  f.scene.splats.push_back(far);
  const BackwardResult r = backward(f.scene, objective_of(f));
  for (double g : r.gradients.splat(f.scene.size() - 1)) EXPECT_EQ(g, 0.0);
}

TEST(Backward, ObjectiveValidation) {
  const GradFixture f = make_grad_fixture(5);
  Objective o = objective_of(f);
  o.images.pop_back();
  EXPECT_THROW(backward(f.scene, o), InvalidArgument);
  o = objective_of(f);
  o.images[0] = ImageRGB(3, 3, Vec3::Zero());
  EXPECT_THROW(backward(f.scene, o), InvalidArgument);
}

TEST(Backward, FrozenNormalsAreConstants) {
  const GradFixture f = make_grad_fixture(6);
  const Objective o = objective_of(f);
  const std::vector<NormalMap> frozen = depth_normals(f.scene, o);
  EXPECT_EQ(evaluate_loss(f.scene, o, &frozen).total, evaluate_loss(f.scene, o).total);
  SplatScene moved = f.scene;
  moved.splats[0].center.z() += 0.01;
  const double with_frozen = evaluate_loss(moved, o, &frozen).normal;
  const double recomputed = evaluate_loss(moved, o).normal;
  EXPECT_NE(with_frozen, recomputed);
}

}  // namespace
}  // namespace s2dgs
