// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sparse2dgs/eval.hpp"
#include "sparse2dgs/grad.hpp"
#include "sparse2dgs/kdtree.hpp"
#include "sparse2dgs/render.hpp"
#include "sparse2dgs/surface.hpp"
#include "sparse2dgs/synth.hpp"

namespace {

using namespace s2dgs;

std::vector<Vec3> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  return pts;
}

// Scene of `splats` splats initialized from the synthetic sphere.
struct SphereFixture {
  SyntheticScene scene;
  SplatScene splats;

  SphereFixture(int size, std::size_t splats_count)
      : scene(make_scene(ShapeKind::sphere, size, 1)), splats(init_splats(scene.dense_clean(splats_count))) {}
};

void BM_RenderView(benchmark::State& state) {
  const SphereFixture f(static_cast<int>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  RenderConfig cfg;
  cfg.culling = state.range(2) != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_view(f.splats, f.scene.cameras[0], cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_RenderView)
    ->Args({48, 2000, 1})
    ->Args({48, 2000, 0})
    ->Args({96, 2000, 1})
    ->Unit(benchmark::kMillisecond);

void BM_RenderViewF32(benchmark::State& state) {
  const SphereFixture f(48, 2000);
  RenderConfig cfg;
  cfg.precision = Precision::f32;
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_view(f.splats, f.scene.cameras[0], cfg));
  }
}
BENCHMARK(BM_RenderViewF32)->Unit(benchmark::kMillisecond);

void BM_Backward(benchmark::State& state) {
  const SphereFixture f(static_cast<int>(state.range(0)), 2000);
  const Objective objective{f.scene.cameras, f.scene.gt_images, {}, {}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward(f.splats, objective));
  }
}
BENCHMARK(BM_Backward)->Arg(32)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_CompositeRay(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<CompositeInput> in(static_cast<std::size_t>(state.range(0)));
  double z = 0.1;
  for (auto& c : in) {
    z += u(rng);
    c = CompositeInput{0.3 * u(rng), u(rng), Vec3(u(rng), u(rng), u(rng)), z, Vec3(0, 0, -1)};
  }
  const RenderConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(composite_ray(in, Vec3::Zero(), cfg));
  }
}
BENCHMARK(BM_CompositeRay)->Arg(16)->Arg(256);

void BM_KdTreeBuild(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(KdTree(pts));
  }
}
BENCHMARK(BM_KdTreeBuild)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_KdTreeKnn(benchmark::State& state) {
  const auto pts = random_points(100000, 5);
  const auto queries = random_points(1000, 6);
  const KdTree tree(pts);
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    for (const Vec3& q : queries) benchmark::DoNotOptimize(tree.knn(q, k));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(queries.size()));
}
BENCHMARK(BM_KdTreeKnn)->Arg(1)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_Chamfer(benchmark::State& state) {
  PointCloud a, b;
  a.points = random_points(static_cast<std::size_t>(state.range(0)), 7);
  b.points = random_points(static_cast<std::size_t>(state.range(0)), 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(chamfer_distance(a, b));
  }
}
BENCHMARK(BM_Chamfer)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_MarchingCubes(benchmark::State& state) {
  const double voxel = 2.4 / static_cast<double>(state.range(0));
  TsdfVolume v = TsdfVolume::from_bounds(Vec3::Constant(-1.2), Vec3::Constant(1.2), voxel, 4.0 * voxel);
  for (int k = 0; k < v.dims()[2]; ++k) {
    for (int j = 0; j < v.dims()[1]; ++j) {
      for (int i = 0; i < v.dims()[0]; ++i) {
        v.tsdf_values()[v.index(i, j, k)] = std::clamp((v.point(i, j, k).norm() - 1.0) / (4.0 * voxel), -1.0, 1.0);
        v.weight_values()[v.index(i, j, k)] = 1.0;
      }
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(marching_cubes(v));
  }
}
BENCHMARK(BM_MarchingCubes)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
