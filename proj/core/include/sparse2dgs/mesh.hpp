// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sparse2dgs/geometry.hpp"

namespace s2dgs {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  bool empty() const { return triangles.empty(); }
  // Indices in range, finite vertices, no repeated index within a triangle.
  void validate() const;
};

}  // namespace s2dgs
