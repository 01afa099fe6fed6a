// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "sparse2dgs/mesh.hpp"
#include "sparse2dgs/pointcloud.hpp"

namespace s2dgs {

enum class PlyFormat { kAscii, kBinaryLittleEndian };

// Reads ASCII or binary little-endian PLY. The vertex element must carry x, y
// and z; nx/ny/nz and red/green/blue are honored when present (8-bit colors
// map to [0,1]). Unrecognized properties are skipped with a warning. Other
// elements (faces included) are ignored.
PointCloud load_ply(const std::filesystem::path& path);
void save_ply(const PointCloud& cloud, const std::filesystem::path& path,
              PlyFormat format = PlyFormat::kBinaryLittleEndian);

// Vertex positions plus the face element (polygons are fan-triangulated).
TriangleMesh load_mesh_ply(const std::filesystem::path& path);
// Always ASCII, with vertex and face elements.
void save_mesh_ply(const TriangleMesh& mesh, const std::filesystem::path& path);

}  // namespace s2dgs
