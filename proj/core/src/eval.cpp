// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparse2dgs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sparse2dgs/error.hpp"
#include "sparse2dgs/kdtree.hpp"
#include "sparse2dgs/parallel.hpp"

namespace s2dgs {
namespace {

double mean_nearest(const std::vector<Vec3>& from, const KdTree& to) {
  std::vector<double> dist(from.size());
  parallel_for(from.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) dist[i] = std::sqrt(to.nearest(from[i]).sq_dist);
  });
  double sum = 0.0;
  for (const double d : dist) sum += d;
  return sum / static_cast<double>(from.size());
}

}  // namespace

PointCloud sample_mesh(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  mesh.validate();
  if (mesh.empty()) throw InvalidArgument("sample_mesh: mesh has no triangles");
  if (n == 0) throw InvalidArgument("sample_mesh: sample count must be >= 1");
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& f = mesh.triangles[t];
    const Vec3& a = mesh.vertices[f[0]];
    total += 0.5 * (mesh.vertices[f[1]] - a).cross(mesh.vertices[f[2]] - a).norm();
    cumulative[t] = total;
  }
  if (!(total > 0.0)) throw InvalidArgument("sample_mesh: mesh has zero surface area");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointCloud out;
  out.points.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double pick = unit(rng) * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    const std::size_t t = std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1);
    const auto& f = mesh.triangles[t];
    const double r1 = std::sqrt(unit(rng)), r2 = unit(rng);
    out.points.push_back((1.0 - r1) * mesh.vertices[f[0]] + r1 * (1.0 - r2) * mesh.vertices[f[1]] +
                         r1 * r2 * mesh.vertices[f[2]]);
  }
  return out;
}

CdReport chamfer_distance(const PointCloud& recon, const PointCloud& gt) {
  if (recon.empty() || gt.empty()) throw InvalidArgument("chamfer_distance: empty point cloud");
  const KdTree recon_tree(recon.points), gt_tree(gt.points);
  CdReport r;
  r.acc = mean_nearest(recon.points, gt_tree);
  r.comp = mean_nearest(gt.points, recon_tree);
  r.cd = (r.acc + r.comp) / 2.0;
  return r;
}

}  // namespace s2dgs
