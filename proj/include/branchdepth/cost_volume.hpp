#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "branchdepth/image.hpp"

namespace branchdepth {

/// Sentinel for cells with no defined cost. Never wins a minimisation.
inline constexpr double kCostInvalid = std::numeric_limits<double>::infinity();

inline bool is_valid_cost(double c) noexcept { return c < kCostInvalid; }

enum class CostKind { ad, sd, ncc };

std::string_view to_string(CostKind kind);
CostKind cost_kind_from_string(std::string_view name);

/// Inclusive range of integer disparities searched.
struct DisparityRange {
  int min = 0;
  int max = 0;

  int count() const noexcept { return max - min + 1; }
  bool contains(int d) const noexcept { return d >= min && d <= max; }
  friend bool operator==(const DisparityRange&, const DisparityRange&) = default;
};

/// Template window and search range for block matching.
struct MatchWindow {
  int radius = 0;
  DisparityRange range;
};

/// H x W x D matching costs, lower is better. Costs for one pixel are
/// contiguous so per-pixel disparity scans are cache friendly.
class CostVolume {
 public:
  CostVolume() = default;
  CostVolume(int width, int height, DisparityRange range, double fill = kCostInvalid);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  DisparityRange range() const noexcept { return range_; }
  int depth() const noexcept { return range_.count(); }

  /// d is an absolute disparity inside range().
  double& at(int x, int y, int d) { return data_[offset(x, y) + static_cast<std::size_t>(d - range_.min)]; }
  double at(int x, int y, int d) const { return data_[offset(x, y) + static_cast<std::size_t>(d - range_.min)]; }

  std::span<double> column(int x, int y) {
    return {data_.data() + offset(x, y), static_cast<std::size_t>(depth())};
  }
  std::span<const double> column(int x, int y) const {
    return {data_.data() + offset(x, y), static_cast<std::size_t>(depth())};
  }

  std::span<double> cells() noexcept { return data_; }
  std::span<const double> cells() const noexcept { return data_; }

  friend bool operator==(const CostVolume&, const CostVolume&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
           static_cast<std::size_t>(range_.count());
  }

  int width_ = 0;
  int height_ = 0;
  DisparityRange range_;
  std::vector<double> data_;
};

/// Patch means used by NCC.
struct WindowStats {
  double mu_left = 0.0;
  double mu_right = 0.0;
};

// Scalar costs. The right image is sampled at x - d so that d = u_l - u_r >= 0.
// Out-of-bounds samples yield kCostInvalid.
double cost_ad(const GrayImage& left, const GrayImage& right, int x, int y, int d);
double cost_sd(const GrayImage& left, const GrayImage& right, int x, int y, int d);

/// Means of the (2r+1)^2 patches around (x, y) in the left image and (x-d, y)
/// in the right image. The windows must be in bounds.
WindowStats window_stats(const GrayImage& left, const GrayImage& right, int radius, int x,
                         int y, int d);

/// Normalised cross-correlation in [-1, 1]. kCostInvalid when a window leaves
/// either image or either patch has zero variance.
double cost_ncc(const GrayImage& left, const GrayImage& right, const MatchWindow& window,
                int x, int y, int d);

/// Fills every cell with the chosen cost. NCC is stored as 1 - NCC so every
/// volume is lower-is-better. AD and SD are per pixel; the window radius only
/// shapes NCC.
CostVolume build_cost_volume(const GrayImage& left, const GrayImage& right,
                             const MatchWindow& window, CostKind kind);

/// Re-indexes a left-referenced volume to the right view:
/// C_R(x, y, d) = C_L(x + d, y, d).
CostVolume right_reference_volume(const CostVolume& left_volume);

}  // namespace branchdepth
