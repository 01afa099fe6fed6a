// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cassert>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sparse2dgs/geometry.hpp"

namespace s2dgs {

// Row-major W x H grid of values; (x, y) = (column, row).
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, const T& fill)
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  std::size_t index(int x, int y) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using ImageRGB = Grid<Vec3>;          // linear RGB in [0, 1]
using DepthMap = Grid<double>;        // camera-space z, 0 = invalid
using Mask = Grid<std::uint8_t>;      // nonzero = foreground
using NormalMap = Grid<Vec3>;

inline ImageRGB make_image(int w, int h, const Vec3& fill = Vec3::Zero()) {
  return ImageRGB(w, h, fill);
}

// Binary PPM (P6, 8-bit). Values are clamped to [0,1] and rounded.
void write_ppm(const ImageRGB& image, const std::filesystem::path& path);
ImageRGB read_ppm(const std::filesystem::path& path);

// Binary PGM (P5, 8-bit). Masks read as nonzero = foreground.
void write_pgm(const Mask& mask, const std::filesystem::path& path);
Mask read_pgm(const std::filesystem::path& path);

// Greyscale PFM ("Pf", little-endian float32, bottom row first per the format).
void write_pfm(const Grid<double>& image, const std::filesystem::path& path);
Grid<double> read_pfm(const std::filesystem::path& path);

}  // namespace s2dgs
