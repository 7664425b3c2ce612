#include "branchdepth/cost_volume.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace branchdepth {

std::string_view to_string(CostKind kind) {
  switch (kind) {
    case CostKind::ad: return "ad";
    case CostKind::sd: return "sd";
    case CostKind::ncc: return "ncc";
  }
  return "ad";
}

CostKind cost_kind_from_string(std::string_view name) {
  if (name == "ad") return CostKind::ad;
  if (name == "sd") return CostKind::sd;
  if (name == "ncc") return CostKind::ncc;
  throw ValidationError("unknown cost kind '" + std::string(name) + "'");
}

CostVolume::CostVolume(int width, int height, DisparityRange range, double fill)
    : width_(width), height_(height), range_(range) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("cost volume dimensions must be positive");
  }
  if (range.max < range.min) {
    throw ValidationError("cost volume disparity range is empty");
  }
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                   static_cast<std::size_t>(range.count()),
               fill);
}

namespace {

bool pixel_pair_in_bounds(const GrayImage& left, const GrayImage& right, int x, int y, int d) {
  return left.contains(x, y) && right.contains(x - d, y);
}

bool window_in_bounds(const GrayImage& img, int cx, int cy, int r) {
  return cx - r >= 0 && cy - r >= 0 && cx + r < img.width() && cy + r < img.height();
}

void validate_window(const GrayImage& left, const GrayImage& right, const MatchWindow& window) {
  require_same_shape(left, right, "stereo pair");
  if (window.radius < 0) {
    throw ValidationError("match window radius must be non-negative");
  }
  const auto& r = window.range;
  if (r.min < 0 || r.min >= r.max || r.max >= left.width()) {
    throw ValidationError("disparity range must satisfy 0 <= d_min < d_max < width, got [" +
                          std::to_string(r.min) + ", " + std::to_string(r.max) + "]");
  }
}

}  // namespace

double cost_ad(const GrayImage& left, const GrayImage& right, int x, int y, int d) {
  if (!pixel_pair_in_bounds(left, right, x, y, d)) return kCostInvalid;
  return std::abs(left(x, y) - right(x - d, y));
}

double cost_sd(const GrayImage& left, const GrayImage& right, int x, int y, int d) {
  if (!pixel_pair_in_bounds(left, right, x, y, d)) return kCostInvalid;
  const double diff = left(x, y) - right(x - d, y);
  return diff * diff;
}

WindowStats window_stats(const GrayImage& left, const GrayImage& right, int radius, int x,
                         int y, int d) {
  double sum_l = 0.0;
  double sum_r = 0.0;
  for (int j = -radius; j <= radius; ++j) {
    for (int i = -radius; i <= radius; ++i) {
      sum_l += left(x + i, y + j);
      sum_r += right(x - d + i, y + j);
    }
  }
  const double n = static_cast<double>((2 * radius + 1) * (2 * radius + 1));
  return {sum_l / n, sum_r / n};
}

double cost_ncc(const GrayImage& left, const GrayImage& right, const MatchWindow& window,
                int x, int y, int d) {
  const int r = window.radius;
  if (!window_in_bounds(left, x, y, r) || !window_in_bounds(right, x - d, y, r)) {
    return kCostInvalid;
  }
  const WindowStats stats = window_stats(left, right, r, x, y, d);
  double cross = 0.0;
  double var_l = 0.0;
  double var_r = 0.0;
  for (int j = -r; j <= r; ++j) {
    for (int i = -r; i <= r; ++i) {
      const double a = left(x + i, y + j) - stats.mu_left;
      const double b = right(x - d + i, y + j) - stats.mu_right;
      cross += a * b;
      var_l += a * a;
      var_r += b * b;
    }
  }
  if (var_l <= 0.0 || var_r <= 0.0) return kCostInvalid;
  return std::clamp(cross / std::sqrt(var_l * var_r), -1.0, 1.0);
}

CostVolume build_cost_volume(const GrayImage& left, const GrayImage& right,
                             const MatchWindow& window, CostKind kind) {
  validate_window(left, right, window);
  CostVolume cv(left.width(), left.height(), window.range);
  for (int y = 0; y < left.height(); ++y) {
    for (int x = 0; x < left.width(); ++x) {
      auto col = cv.column(x, y);
      for (int d = window.range.min; d <= window.range.max; ++d) {
        double c = kCostInvalid;
        switch (kind) {
          case CostKind::ad: c = cost_ad(left, right, x, y, d); break;
          case CostKind::sd: c = cost_sd(left, right, x, y, d); break;
          case CostKind::ncc: {
            const double ncc = cost_ncc(left, right, window, x, y, d);
            c = is_valid_cost(ncc) ? 1.0 - ncc : kCostInvalid;
            break;
          }
        }
        col[static_cast<std::size_t>(d - window.range.min)] = c;
      }
    }
  }
  return cv;
}

CostVolume right_reference_volume(const CostVolume& left_volume) {
  const DisparityRange range = left_volume.range();
  CostVolume out(left_volume.width(), left_volume.height(), range);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      for (int d = range.min; d <= range.max; ++d) {
        if (x + d < out.width()) out.at(x, y, d) = left_volume.at(x + d, y, d);
      }
    }
  }
  return out;
}

}  // namespace branchdepth
