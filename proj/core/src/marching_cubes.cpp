// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <limits>

#include "detail/mc_tables.hpp"
#include "sparse2dgs/surface.hpp"

namespace s2dgs {
namespace {

constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdgeCorners[12][2] = {{0, 1}, {1, 2}, {3, 2}, {0, 3}, {4, 5}, {5, 6},
                                     {7, 6}, {4, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

}  // namespace

TriangleMesh marching_cubes(const TsdfVolume& volume) {
  TriangleMesh mesh;
  const auto dims = volume.dims();
  if (dims[0] < 2 || dims[1] < 2 || dims[2] < 2) return mesh;
  const auto& tsdf = volume.tsdf_values();
  const auto& weight = volume.weight_values();
  // Vertex id of the edge leaving grid point idx along axis a: slot 3 idx + a.
  std::vector<std::uint32_t> edge_vertex(3 * volume.size(), kNone);

  for (int k = 0; k + 1 < dims[2]; ++k) {
    for (int j = 0; j + 1 < dims[1]; ++j) {
      for (int i = 0; i + 1 < dims[0]; ++i) {
        std::size_t idx[8];
        double val[8];
        bool observed = true;
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          idx[c] = volume.index(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]);
          if (!(weight[idx[c]] > 0.0)) {
            observed = false;
            break;
          }
          val[c] = tsdf[idx[c]];
          if (val[c] < 0.0) cube |= 1 << c;
        }
        if (!observed) continue;
        const int edges = detail::kEdgeTable[cube];
        if (edges == 0) continue;

        std::uint32_t vid[12];
        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          // corners are listed with the lower grid point first
          const int a = kEdgeCorners[e][0], b = kEdgeCorners[e][1];
          int axis = 0;
          while (kCorner[a][axis] == kCorner[b][axis]) ++axis;
          std::uint32_t& slot = edge_vertex[3 * idx[a] + axis];
          if (slot == kNone) {
            const double t = val[a] / (val[a] - val[b]);
            const Vec3 pa = volume.point(i + kCorner[a][0], j + kCorner[a][1], k + kCorner[a][2]);
            const Vec3 pb = volume.point(i + kCorner[b][0], j + kCorner[b][1], k + kCorner[b][2]);
            slot = static_cast<std::uint32_t>(mesh.vertices.size());
            mesh.vertices.push_back(pa + t * (pb - pa));
          }
          vid[e] = slot;
        }
        const int* tri = detail::kTriangleTable[cube];
        for (int t = 0; tri[t] != -1; t += 3) {
          const std::array<std::uint32_t, 3> f{vid[tri[t]], vid[tri[t + 1]], vid[tri[t + 2]]};
          if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
          mesh.triangles.push_back(f);
        }
      }
    }
  }
  return mesh;
}

}  // namespace s2dgs
