// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "sparse2dgs/error.hpp"
#include "sparse2dgs/image.hpp"

namespace s2dgs {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

// Reads the next whitespace-separated token, skipping '#' comments.
std::string next_token(std::istream& in, const std::filesystem::path& path) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(c);
  }
  if (tok.empty()) throw ParseError(path.string() + ": truncated header");
  return tok;
}

int parse_positive(const std::string& s, const std::filesystem::path& path) {
  try {
    const int v = std::stoi(s);
    if (v > 0) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(path.string() + ": bad header value '" + s + "'");
}

std::uint8_t to_byte(double v) {
  const double c = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

}  // namespace

void write_ppm(const ImageRGB& image, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<std::uint8_t> bytes;
  bytes.reserve(image.size() * 3);
  for (const Vec3& c : image.values()) {
    bytes.push_back(to_byte(c.x()));
    bytes.push_back(to_byte(c.y()));
    bytes.push_back(to_byte(c.z()));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ImageRGB read_ppm(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (next_token(in, path) != "P6") throw ParseError(path.string() + ": not a binary PPM (P6)");
  const int w = parse_positive(next_token(in, path), path);
  const int h = parse_positive(next_token(in, path), path);
  if (parse_positive(next_token(in, path), path) != 255) {
    throw ParseError(path.string() + ": only 8-bit PPM is supported");
  }
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw ParseError(path.string() + ": truncated pixel data");
  }
  ImageRGB img(w, h, Vec3::Zero());
  for (std::size_t i = 0; i < img.size(); ++i) {
    img[i] = Vec3(bytes[3 * i], bytes[3 * i + 1], bytes[3 * i + 2]) / 255.0;
  }
  return img;
}

void write_pgm(const Mask& mask, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  std::vector<std::uint8_t> bytes(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) bytes[i] = mask[i] ? 255 : 0;
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Mask read_pgm(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (next_token(in, path) != "P5") throw ParseError(path.string() + ": not a binary PGM (P5)");
  const int w = parse_positive(next_token(in, path), path);
  const int h = parse_positive(next_token(in, path), path);
  if (parse_positive(next_token(in, path), path) > 255) {
    throw ParseError(path.string() + ": only 8-bit PGM is supported");
  }
  Mask mask(w, h, 0);
  std::vector<std::uint8_t> bytes(mask.size());
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw ParseError(path.string() + ": truncated pixel data");
  }
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = bytes[i] != 0 ? 1 : 0;
  return mask;
}

void write_pfm(const Grid<double>& image, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "Pf\n" << image.width() << ' ' << image.height() << "\n-1.0\n";
  std::vector<float> row(static_cast<std::size_t>(image.width()));
  for (int y = image.height() - 1; y >= 0; --y) {
    for (int x = 0; x < image.width(); ++x) row[x] = static_cast<float>(image(x, y));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
}

Grid<double> read_pfm(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (next_token(in, path) != "Pf") throw ParseError(path.string() + ": not a greyscale PFM (Pf)");
  const int w = parse_positive(next_token(in, path), path);
  const int h = parse_positive(next_token(in, path), path);
  const std::string scale = next_token(in, path);
  if (scale.empty() || scale[0] != '-') {
    throw ParseError(path.string() + ": big-endian PFM is not supported");
  }
  Grid<double> img(w, h, 0.0);
  std::vector<float> row(static_cast<std::size_t>(w));
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw ParseError(path.string() + ": truncated pixel data");
    for (int x = 0; x < w; ++x) img(x, y) = row[x];
  }
  return img;
}

}  // namespace s2dgs
