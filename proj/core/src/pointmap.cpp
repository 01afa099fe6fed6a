// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <bit>
#include <cstring>
#include <fstream>

#include "sparse2dgs/error.hpp"
#include "sparse2dgs/pointcloud.hpp"

namespace s2dgs {
namespace {

constexpr char kMagic[4] = {'S', '2', 'P', 'M'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little);

template <typename T>
void write_raw(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (in.gcount() != sizeof(T)) throw ParseError("point map " + path.string() + ": truncated file");
  return v;
}

}  // namespace

void save_pointmap(const PointMap& map, const std::filesystem::path& path) {
  map.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write point map " + path.string());
  out.write(kMagic, 4);
  write_raw(out, kVersion);
  write_raw(out, static_cast<std::uint32_t>(map.width));
  write_raw(out, static_cast<std::uint32_t>(map.height));
  for (const Vec3& p : map.data) {
    for (int k = 0; k < 3; ++k) write_raw(out, static_cast<float>(p[k]));
  }
  out.write(reinterpret_cast<const char*>(map.valid.data()), static_cast<std::streamsize>(map.valid.size()));
}

PointMap load_pointmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open point map " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("point map " + path.string() + ": bad magic (expected S2PM)");
  }
  const auto version = read_raw<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw ParseError("point map " + path.string() + ": unsupported version " + std::to_string(version));
  }
  PointMap map;
  const auto w = read_raw<std::uint32_t>(in, path);
  const auto h = read_raw<std::uint32_t>(in, path);
  if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16)) {
    throw ParseError("point map " + path.string() + ": implausible dimensions");
  }
  map.width = static_cast<int>(w);
  map.height = static_cast<int>(h);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<float> xyz(3 * n);
  in.read(reinterpret_cast<char*>(xyz.data()), static_cast<std::streamsize>(xyz.size() * sizeof(float)));
  map.valid.resize(n);
  in.read(reinterpret_cast<char*>(map.valid.data()), static_cast<std::streamsize>(n));
  if (!in) throw ParseError("point map " + path.string() + ": truncated payload");
  map.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    map.data[i] = Vec3(xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]);
    map.valid[i] = map.valid[i] ? 1 : 0;
    if (map.valid[i] && !is_finite(map.data[i])) {
      throw ParseError("point map " + path.string() + ": non-finite coordinate at a valid pixel");
    }
  }
  return map;
}

}  // namespace s2dgs
