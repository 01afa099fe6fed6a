// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "sparse2dgs/error.hpp"
#include "sparse2dgs/splat.hpp"

namespace s2dgs {
namespace {

constexpr char kMagic[8] = {'S', '2', 'D', 'G', 'S', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;
constexpr int kRecordDoubles = 13;

static_assert(std::endian::native == std::endian::little);

}  // namespace

// Layout (little-endian):
//   char[8]  "S2DGSCKP"
//   u32      version (1)
//   u32      doubles per splat record (13)
//   u64      splat count
//   f64[3]   background color
//   count x { center xyz, unit quaternion wxyz, scale_u, scale_v, opacity,
//             color rgb (unclamped) }
void save_checkpoint(const SplatScene& scene, const std::filesystem::path& path) {
  scene.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  std::vector<double> payload;
  payload.reserve(3 + scene.size() * kRecordDoubles);
  for (int k = 0; k < 3; ++k) payload.push_back(scene.background[k]);
  for (const Splat2D& s : scene.splats) {
    const Vec4 q = s.rotation / s.rotation.norm();
    const Vec2 sc = s.scales();
    for (int k = 0; k < 3; ++k) payload.push_back(s.center[k]);
    for (int k = 0; k < 4; ++k) payload.push_back(q[k]);
    payload.push_back(sc.x());
    payload.push_back(sc.y());
    payload.push_back(s.opacity());
    for (int k = 0; k < 3; ++k) payload.push_back(s.color[k]);
  }
  const std::uint32_t version = kVersion;
  const std::uint32_t record = kRecordDoubles;
  const std::uint64_t count = scene.size();
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&record), sizeof(record));
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

SplatScene load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[8] = {};
  std::uint32_t version = 0, record = 0;
  std::uint64_t count = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&record), sizeof(record));
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw ParseError("checkpoint " + path.string() + ": bad header");
  }
  if (version != kVersion || record != kRecordDoubles) {
    throw ParseError("checkpoint " + path.string() + ": unsupported version " + std::to_string(version));
  }
  if (count > (std::uint64_t{1} << 32)) throw ParseError("checkpoint " + path.string() + ": implausible count");
  std::vector<double> payload(3 + count * kRecordDoubles);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!in) throw ParseError("checkpoint " + path.string() + ": truncated payload");

  SplatScene scene;
  scene.background = Vec3(payload[0], payload[1], payload[2]);
  scene.splats.reserve(count);
  constexpr double kTiny = std::numeric_limits<double>::denorm_min();
  for (std::uint64_t i = 0; i < count; ++i) {
    const double* d = payload.data() + 3 + i * kRecordDoubles;
    Splat2D s;
    s.center = Vec3(d[0], d[1], d[2]);
    s.rotation = Vec4(d[3], d[4], d[5], d[6]);
    if (!(d[7] > 0.0) || !(d[8] > 0.0) || !(d[9] >= 0.0) || !(d[9] <= 1.0)) {
      throw ParseError("checkpoint " + path.string() + ": splat " + std::to_string(i) +
                       " has invalid scale or opacity");
    }
    s.log_scales = Vec2(std::log(d[7]), std::log(d[8]));
    const double alpha = std::clamp(d[9], kTiny, std::nextafter(1.0, 0.0));
    s.opacity_logit = logit(alpha);
    s.color = Vec3(d[10], d[11], d[12]);
    scene.splats.push_back(s);
  }
  try {
    scene.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what());
  }
  return scene;
}

}  // namespace s2dgs
