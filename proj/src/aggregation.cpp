#include "branchdepth/aggregation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace branchdepth {

void validate(const MultiWindowParams& params) {
  if (params.offsets.empty()) throw ValidationError("multi-window aggregation needs N >= 1 windows");
  if (params.radius < 0) throw ValidationError("multi-window radius must be non-negative");
  for (std::size_t i = 0; i < params.offsets.size(); ++i) {
    for (std::size_t j = i + 1; j < params.offsets.size(); ++j) {
      if (params.offsets[i] == params.offsets[j]) {
        throw ValidationError("multi-window offsets must be distinct");
      }
    }
  }
}

void validate(const DiffusionParams& params) {
  if (params.iterations < 1) throw ValidationError("diffusion needs at least one iteration");
  if (params.weights.size() != 1 && params.weights.size() != static_cast<std::size_t>(params.iterations)) {
    throw ValidationError("diffusion weights must hold one value or one per iteration");
  }
  for (double w : params.weights) {
    if (!std::isfinite(w) || w < 0.0) throw ValidationError("diffusion weights must be finite and non-negative");
  }
}

void validate(const EnergyParams& params) {
  if (!(params.p1 > 0.0) || !(params.p1 <= params.p2) || !std::isfinite(params.p2)) {
    throw ValidationError("energy penalties must satisfy 0 < p1 <= p2");
  }
  if (!(params.lambda >= 0.0) || !std::isfinite(params.lambda)) {
    throw ValidationError("energy lambda must be finite and non-negative");
  }
  if (params.paths != 1 && params.paths != 2 && params.paths != 4 && params.paths != 8) {
    throw ValidationError("semi-global paths must be 1, 2, 4 or 8, got " + std::to_string(params.paths));
  }
}

namespace {

// Renormalised window sums without masking the centre cell. Windows with no
// valid cell get kCostInvalid. Column sums over the row band are maintained
// incrementally, then swept horizontally.
CostVolume box_sums(const CostVolume& cv, int radius) {
  const int w = cv.width();
  const int h = cv.height();
  const int nd = cv.depth();
  const double area = static_cast<double>((2 * radius + 1) * (2 * radius + 1));
  CostVolume out(w, h, cv.range());

  const std::size_t row_cells = static_cast<std::size_t>(w) * static_cast<std::size_t>(nd);
  std::vector<double> col_sum(row_cells, 0.0);
  std::vector<int> col_count(row_cells, 0);

  auto accumulate_row = [&](int y, int sign) {
    for (int x = 0; x < w; ++x) {
      auto src = cv.column(x, y);
      const std::size_t base = static_cast<std::size_t>(x) * static_cast<std::size_t>(nd);
      for (int k = 0; k < nd; ++k) {
        const double c = src[static_cast<std::size_t>(k)];
        if (is_valid_cost(c)) {
          col_sum[base + k] += sign * c;
          col_count[base + k] += sign;
        }
      }
    }
  };

  for (int y = 0; y <= std::min(radius, h - 1); ++y) accumulate_row(y, +1);

  std::vector<double> win_sum(static_cast<std::size_t>(nd));
  std::vector<int> win_count(static_cast<std::size_t>(nd));
  for (int y = 0; y < h; ++y) {
    if (y > 0) {
      if (y + radius < h) accumulate_row(y + radius, +1);
      if (y - radius - 1 >= 0) accumulate_row(y - radius - 1, -1);
    }
    std::fill(win_sum.begin(), win_sum.end(), 0.0);
    std::fill(win_count.begin(), win_count.end(), 0);
    auto add_column = [&](int x, int sign) {
      const std::size_t base = static_cast<std::size_t>(x) * static_cast<std::size_t>(nd);
      for (int k = 0; k < nd; ++k) {
        win_sum[static_cast<std::size_t>(k)] += sign * col_sum[base + k];
        win_count[static_cast<std::size_t>(k)] += sign * col_count[base + k];
      }
    };
    for (int x = 0; x <= std::min(radius, w - 1); ++x) add_column(x, +1);
    for (int x = 0; x < w; ++x) {
      if (x > 0) {
        if (x + radius < w) add_column(x + radius, +1);
        if (x - radius - 1 >= 0) add_column(x - radius - 1, -1);
      }
      auto dst = out.column(x, y);
      for (int k = 0; k < nd; ++k) {
        const int n = win_count[static_cast<std::size_t>(k)];
        dst[static_cast<std::size_t>(k)] =
            n > 0 ? win_sum[static_cast<std::size_t>(k)] * (area / n) : kCostInvalid;
      }
    }
  }
  return out;
}

void mask_invalid_centres(const CostVolume& reference, CostVolume& out) {
  auto src = reference.cells();
  auto dst = out.cells();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!is_valid_cost(src[i])) dst[i] = kCostInvalid;
  }
}

}  // namespace

CostVolume aggregate_fixed(const CostVolume& cv, int radius) {
  if (radius < 0) throw ValidationError("aggregation radius must be non-negative");
  if (radius == 0) return cv;
  CostVolume out = box_sums(cv, radius);
  mask_invalid_centres(cv, out);
  return out;
}

CostVolume aggregate_multi(const CostVolume& cv, const MultiWindowParams& params) {
  validate(params);
  const CostVolume sums = box_sums(cv, params.radius);
  const double n_windows = static_cast<double>(params.offsets.size());
  CostVolume out(cv.width(), cv.height(), cv.range());
  const int nd = cv.depth();
  std::vector<double> total(static_cast<std::size_t>(nd));
  std::vector<int> used(static_cast<std::size_t>(nd));
  for (int y = 0; y < cv.height(); ++y) {
    for (int x = 0; x < cv.width(); ++x) {
      std::fill(total.begin(), total.end(), 0.0);
      std::fill(used.begin(), used.end(), 0);
      for (const WindowOffset& off : params.offsets) {
        const int wx = x + off.dx;
        const int wy = y + off.dy;
        if (wx < 0 || wy < 0 || wx >= cv.width() || wy >= cv.height()) continue;
        auto col = sums.column(wx, wy);
        for (int k = 0; k < nd; ++k) {
          const double c = col[static_cast<std::size_t>(k)];
          if (is_valid_cost(c)) {
            total[static_cast<std::size_t>(k)] += c;
            ++used[static_cast<std::size_t>(k)];
          }
        }
      }
      auto dst = out.column(x, y);
      for (int k = 0; k < nd; ++k) {
        const int n = used[static_cast<std::size_t>(k)];
        dst[static_cast<std::size_t>(k)] =
            n > 0 ? total[static_cast<std::size_t>(k)] * (n_windows / n) : kCostInvalid;
      }
    }
  }
  mask_invalid_centres(cv, out);
  return out;
}

CostVolume aggregate_diffuse(const CostVolume& cv, const DiffusionParams& params) {
  validate(params);
  static constexpr std::array<WindowOffset, 8> kNeighbours{
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};
  const int n_neighbours = params.kernel == DiffusionKernel::four_neighbour ? 4 : 8;
  const double norm = 1.0 / (n_neighbours + 1);

  CostVolume current = cv;
  CostVolume next(cv.width(), cv.height(), cv.range());
  const DisparityRange range = cv.range();
  for (int round = 0; round < params.iterations; ++round) {
    const double weight = params.weights.size() == 1 ? params.weights[0]
                                                     : params.weights[static_cast<std::size_t>(round)];
    for (int y = 0; y < cv.height(); ++y) {
      for (int x = 0; x < cv.width(); ++x) {
        for (int d = range.min; d <= range.max; ++d) {
          const double centre = current.at(x, y, d);
          if (!is_valid_cost(centre)) {
            next.at(x, y, d) = kCostInvalid;
            continue;
          }
          double acc = centre;
          for (int k = 0; k < n_neighbours; ++k) {
            const int nx = x + kNeighbours[static_cast<std::size_t>(k)].dx;
            const int ny = y + kNeighbours[static_cast<std::size_t>(k)].dy;
            double v = centre;
            if (nx >= 0 && ny >= 0 && nx < cv.width() && ny < cv.height()) {
              const double c = current.at(nx, ny, d);
              if (is_valid_cost(c)) v = c;
            }
            acc += v;
          }
          next.at(x, y, d) = weight * acc * norm;
        }
      }
    }
    std::swap(current, next);
  }
  return current;
}

namespace {

struct Direction {
  int dx;
  int dy;
};

constexpr std::array<Direction, 8> kPathDirections{
    {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {-1, 1}, {1, -1}}};

// One scanline direction. prev/cur hold L for a whole row so diagonal and
// vertical predecessors are available; horizontal predecessors come from cur.
void accumulate_path(const CostVolume& cv, Direction dir, double p1, double p2, CostVolume& out) {
  const int w = cv.width();
  const int h = cv.height();
  const int nd = cv.depth();
  const std::size_t stride = static_cast<std::size_t>(nd);
  std::vector<double> prev(static_cast<std::size_t>(w) * stride, kCostInvalid);
  std::vector<double> cur(static_cast<std::size_t>(w) * stride, kCostInvalid);
  std::vector<double> prev_min(static_cast<std::size_t>(w), kCostInvalid);
  std::vector<double> cur_min(static_cast<std::size_t>(w), kCostInvalid);

  const int y_begin = dir.dy >= 0 ? 0 : h - 1;
  const int y_end = dir.dy >= 0 ? h : -1;
  const int y_step = dir.dy >= 0 ? 1 : -1;
  const int x_begin = dir.dx >= 0 ? 0 : w - 1;
  const int x_end = dir.dx >= 0 ? w : -1;
  const int x_step = dir.dx >= 0 ? 1 : -1;

  for (int y = y_begin; y != y_end; y += y_step) {
    for (int x = x_begin; x != x_end; x += x_step) {
      const int px = x - dir.dx;
      const int py = y - dir.dy;
      const double* lp = nullptr;
      double lp_min = kCostInvalid;
      if (px >= 0 && px < w && py >= 0 && py < h) {
        if (dir.dy == 0) {
          lp = cur.data() + static_cast<std::size_t>(px) * stride;
          lp_min = cur_min[static_cast<std::size_t>(px)];
        } else {
          lp = prev.data() + static_cast<std::size_t>(px) * stride;
          lp_min = prev_min[static_cast<std::size_t>(px)];
        }
      }
      auto c = cv.column(x, y);
      double* l = cur.data() + static_cast<std::size_t>(x) * stride;
      double best = kCostInvalid;
      const bool fresh = lp == nullptr || !is_valid_cost(lp_min);
      for (int k = 0; k < nd; ++k) {
        const double ck = c[static_cast<std::size_t>(k)];
        double v;
        if (!is_valid_cost(ck)) {
          v = kCostInvalid;
        } else if (fresh) {
          v = ck;
        } else {
          double m = std::min(lp[k], lp_min + p2);
          if (k > 0) m = std::min(m, lp[k - 1] + p1);
          if (k + 1 < nd) m = std::min(m, lp[k + 1] + p1);
          v = ck + m - lp_min;
        }
        l[k] = v;
        best = std::min(best, v);
      }
      cur_min[static_cast<std::size_t>(x)] = best;
      auto o = out.column(x, y);
      for (int k = 0; k < nd; ++k) o[static_cast<std::size_t>(k)] += l[k];
    }
    std::swap(prev, cur);
    std::swap(prev_min, cur_min);
  }
}

}  // namespace

CostVolume aggregate_semiglobal(const CostVolume& cv, const EnergyParams& params) {
  validate(params);
  CostVolume out(cv.width(), cv.height(), cv.range(), 0.0);
  const double p1 = params.lambda * params.p1;
  const double p2 = params.lambda * params.p2;
  // Directions are summed in a fixed order, so the result is reproducible.
  for (int i = 0; i < params.paths; ++i) {
    accumulate_path(cv, kPathDirections[static_cast<std::size_t>(i)], p1, p2, out);
  }
  return out;
}

double smoothness_penalty(double delta, const EnergyParams& params) {
  const double a = std::abs(delta);
  if (a == 0.0) return 0.0;
  if (a <= 1.0) return params.p1;
  return params.p2;
}

double energy_of(const DisparityMap& disp, const CostVolume& cv, const EnergyParams& params) {
  if (disp.width() != cv.width() || disp.height() != cv.height()) {
    throw ValidationError("energy_of: disparity map and cost volume dimensions differ");
  }
  const DisparityRange range = cv.range();
  double data = 0.0;
  double smooth = 0.0;
  for (int y = 0; y < disp.height(); ++y) {
    for (int x = 0; x < disp.width(); ++x) {
      if (!disp.valid(x, y)) continue;
      const int d = static_cast<int>(std::lround(disp(x, y)));
      data += range.contains(d) ? cv.at(x, y, d) : kCostInvalid;
      if (x + 1 < disp.width() && disp.valid(x + 1, y)) {
        smooth += smoothness_penalty(disp(x, y) - disp(x + 1, y), params);
      }
      if (y + 1 < disp.height() && disp.valid(x, y + 1)) {
        smooth += smoothness_penalty(disp(x, y) - disp(x, y + 1), params);
      }
    }
  }
  return data + params.lambda * smooth;
}

}  // namespace branchdepth
