#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "branchdepth/error.hpp"

namespace branchdepth {

/// Row-major 2-D grid. Coordinates are (x, y) with x the column.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw ValidationError("grid dimensions must be positive, got " +
                            std::to_string(width) + "x" + std::to_string(height));
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }

  bool same_shape(const auto& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Intensities in [0, 255], promoted to double for cost computation.
using GrayImage = Grid<double>;

/// Binary mask; any nonzero value is "set".
using Mask = Grid<std::uint8_t>;

inline constexpr double kInvalidDisparity = std::numeric_limits<double>::infinity();

inline bool is_valid_disparity(double d) noexcept { return std::isfinite(d); }

/// Per-pixel disparity d = u_l - u_r. Invalid pixels hold kInvalidDisparity.
class DisparityMap : public Grid<double> {
 public:
  DisparityMap() = default;
  DisparityMap(int width, int height, double fill = kInvalidDisparity)
      : Grid<double>(width, height, fill) {}

  bool valid(int x, int y) const { return is_valid_disparity((*this)(x, y)); }
  void invalidate(int x, int y) { (*this)(x, y) = kInvalidDisparity; }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (double d : pixels()) n += is_valid_disparity(d) ? 1 : 0;
    return n;
  }
};

inline void require_same_shape(const auto& a, const auto& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ValidationError(std::string(what) + ": dimension mismatch (" +
                          std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                          " vs " + std::to_string(b.width()) + "x" +
                          std::to_string(b.height()) + ")");
  }
}

}  // namespace branchdepth
