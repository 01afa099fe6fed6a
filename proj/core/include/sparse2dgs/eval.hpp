// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "sparse2dgs/mesh.hpp"
#include "sparse2dgs/pointcloud.hpp"

namespace s2dgs {

struct CdReport {
  double cd = 0.0;    // (acc + comp) / 2
  double acc = 0.0;   // mean distance from each reconstructed point to the ground truth
  double comp = 0.0;  // mean distance from each ground-truth point to the reconstruction
};

// n points drawn uniformly over the mesh surface (triangle chosen with
// probability proportional to its area). Throws on an empty or zero-area mesh.
PointCloud sample_mesh(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed = 0);

// Exact nearest-neighbor Chamfer distance. Throws on empty input.
CdReport chamfer_distance(const PointCloud& recon, const PointCloud& gt);

}  // namespace s2dgs
