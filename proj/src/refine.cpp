#include "branchdepth/refine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace branchdepth {

DisparityMap select_wta(const CostVolume& cv) {
  DisparityMap out(cv.width(), cv.height());
  const DisparityRange range = cv.range();
  for (int y = 0; y < cv.height(); ++y) {
    for (int x = 0; x < cv.width(); ++x) {
      auto col = cv.column(x, y);
      double best = kCostInvalid;
      int best_k = -1;
      for (std::size_t k = 0; k < col.size(); ++k) {
        if (col[k] < best) {
          best = col[k];
          best_k = static_cast<int>(k);
        }
      }
      if (best_k >= 0) out(x, y) = range.min + best_k;
    }
  }
  return out;
}

DisparityMap lr_consistency(const DisparityMap& d_left, const DisparityMap& d_right, double tau) {
  require_same_shape(d_left, d_right, "lr_consistency");
  if (!(tau >= 0.0)) throw ValidationError("lr_consistency tolerance must be non-negative");
  DisparityMap out(d_left.width(), d_left.height());
  for (int y = 0; y < d_left.height(); ++y) {
    for (int x = 0; x < d_left.width(); ++x) {
      if (!d_left.valid(x, y)) continue;
      const double d = d_left(x, y);
      const long xr = static_cast<long>(x) - std::lround(d);
      if (xr < 0 || xr >= d_right.width()) continue;
      const int xri = static_cast<int>(xr);
      if (!d_right.valid(xri, y)) continue;
      if (std::abs(d - d_right(xri, y)) <= tau) out(x, y) = d;
    }
  }
  return out;
}

DisparityMap subpixel_refine(const DisparityMap& d, const CostVolume& cv) {
  require_same_shape(d, cv, "subpixel_refine");
  DisparityMap out = d;
  const DisparityRange range = cv.range();
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      if (!d.valid(x, y)) continue;
      const double value = d(x, y);
      const double rounded = std::round(value);
      if (value != rounded) continue;
      const int di = static_cast<int>(rounded);
      if (di <= range.min || di >= range.max) continue;
      const double c_minus = cv.at(x, y, di - 1);
      const double c_zero = cv.at(x, y, di);
      const double c_plus = cv.at(x, y, di + 1);
      if (!is_valid_cost(c_minus) || !is_valid_cost(c_zero) || !is_valid_cost(c_plus)) continue;
      const double den = 2.0 * (c_plus + c_minus - 2.0 * c_zero);
      if (den < 1e-12) continue;
      const double offset = std::clamp((c_plus - c_minus) / den, -0.5, 0.5);
      out(x, y) = value - offset;
    }
  }
  return out;
}

DisparityMap median_filter(const DisparityMap& d, int radius) {
  if (radius < 1) throw ValidationError("median filter radius must be at least 1");
  DisparityMap out(d.width(), d.height());
  std::vector<double> window;
  window.reserve(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)));
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      window.clear();
      for (int j = -radius; j <= radius; ++j) {
        for (int i = -radius; i <= radius; ++i) {
          if (d.contains(x + i, y + j) && d.valid(x + i, y + j)) window.push_back(d(x + i, y + j));
        }
      }
      if (window.empty()) continue;
      const auto mid = window.begin() + static_cast<std::ptrdiff_t>((window.size() - 1) / 2);
      std::nth_element(window.begin(), mid, window.end());
      out(x, y) = *mid;
    }
  }
  return out;
}

void validate(const WlsParams& params) {
  if (!(params.lambda >= 0.0) || !std::isfinite(params.lambda)) {
    throw ValidationError("WLS lambda must be finite and non-negative");
  }
  if (!(params.sigma > 0.0) || !std::isfinite(params.sigma)) {
    throw ValidationError("WLS sigma must be positive");
  }
  if (params.max_iterations < 1) throw ValidationError("WLS needs at least one iteration");
  if (!(params.tolerance > 0.0)) throw ValidationError("WLS tolerance must be positive");
}

double wls_pair_weight(double intensity_a, double intensity_b, double sigma) {
  const double diff = intensity_a - intensity_b;
  return std::exp(-(diff * diff) / (2.0 * sigma * sigma));
}

namespace {

double data_weight(const DisparityMap& initial, const WlsParams& params, int x, int y) {
  if (!initial.valid(x, y)) return 0.0;
  return params.data_weights ? (*params.data_weights)(x, y) : 1.0;
}

void check_inputs(const DisparityMap& d, const GrayImage& guide, const WlsParams& params) {
  require_same_shape(d, guide, "WLS guide");
  if (params.data_weights) {
    require_same_shape(d, *params.data_weights, "WLS data weights");
    for (double w : params.data_weights->pixels()) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("WLS data weights must be finite and non-negative");
    }
  }
  validate(params);
}

// Sparse symmetric system A x = b over the valid pixels, stored as a diagonal
// plus right/down couplings (each undirected edge once).
struct WlsSystem {
  std::vector<int> index;  // pixel -> unknown, -1 when not an unknown
  std::vector<double> diag;
  std::vector<double> rhs;
  struct Edge {
    int a;
    int b;
    double weight;  // lambda * w_pq
  };
  std::vector<Edge> edges;
  double constant = 0.0;  // sum w_p d_p^2

  void multiply(const std::vector<double>& x, std::vector<double>& y) const {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = diag[i] * x[i];
    for (const Edge& e : edges) {
      y[static_cast<std::size_t>(e.a)] -= e.weight * x[static_cast<std::size_t>(e.b)];
      y[static_cast<std::size_t>(e.b)] -= e.weight * x[static_cast<std::size_t>(e.a)];
    }
  }
};

WlsSystem build_system(const DisparityMap& d, const GrayImage& guide, const WlsParams& params,
                       std::vector<double>& x0) {
  WlsSystem sys;
  const int w = d.width();
  const int h = d.height();
  sys.index.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
  int n = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (d.valid(x, y)) sys.index[static_cast<std::size_t>(y) * w + x] = n++;
    }
  }
  sys.diag.assign(static_cast<std::size_t>(n), 0.0);
  sys.rhs.assign(static_cast<std::size_t>(n), 0.0);
  x0.assign(static_cast<std::size_t>(n), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int i = sys.index[static_cast<std::size_t>(y) * w + x];
      if (i < 0) continue;
      const double wp = data_weight(d, params, x, y);
      sys.diag[static_cast<std::size_t>(i)] += wp;
      sys.rhs[static_cast<std::size_t>(i)] = wp * d(x, y);
      sys.constant += wp * d(x, y) * d(x, y);
      x0[static_cast<std::size_t>(i)] = d(x, y);
      auto couple = [&](int nx, int ny) {
        if (nx >= w || ny >= h) return;
        const int j = sys.index[static_cast<std::size_t>(ny) * w + nx];
        if (j < 0) return;
        const double wpq = params.lambda * wls_pair_weight(guide(x, y), guide(nx, ny), params.sigma);
        sys.diag[static_cast<std::size_t>(i)] += wpq;
        sys.diag[static_cast<std::size_t>(j)] += wpq;
        sys.edges.push_back({i, j, wpq});
      };
      couple(x + 1, y);
      couple(x, y + 1);
    }
  }
  return sys;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double wls_objective(const DisparityMap& candidate, const DisparityMap& initial,
                     const GrayImage& guide, const WlsParams& params) {
  require_same_shape(candidate, initial, "wls_objective");
  check_inputs(initial, guide, params);
  double data = 0.0;
  double smooth = 0.0;
  for (int y = 0; y < candidate.height(); ++y) {
    for (int x = 0; x < candidate.width(); ++x) {
      if (!candidate.valid(x, y)) continue;
      const double wp = data_weight(initial, params, x, y);
      if (wp > 0.0) {
        const double diff = candidate(x, y) - initial(x, y);
        data += wp * diff * diff;
      }
      auto pair = [&](int nx, int ny) {
        if (!candidate.contains(nx, ny) || !candidate.valid(nx, ny)) return;
        const double diff = candidate(x, y) - candidate(nx, ny);
        smooth += wls_pair_weight(guide(x, y), guide(nx, ny), params.sigma) * diff * diff;
      };
      pair(x + 1, y);
      pair(x, y + 1);
    }
  }
  return data + params.lambda * smooth;
}

WlsResult wls_smooth(const DisparityMap& d, const GrayImage& guide, const WlsParams& params) {
  check_inputs(d, guide, params);
  WlsResult result;
  result.disparity = d;
  if (params.lambda == 0.0) {
    result.converged = true;
    return result;
  }

  std::vector<double> x;
  const WlsSystem sys = build_system(d, guide, params, x);
  const std::size_t n = x.size();
  if (n == 0) {
    result.converged = true;
    return result;
  }

  // Jacobi-preconditioned conjugate gradient. Each step is an exact line
  // search on the quadratic, so the objective never increases.
  std::vector<double> r(n), z(n), p(n), ap(n);
  sys.multiply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = sys.rhs[i] - ap[i];
  auto precondition = [&](const std::vector<double>& in, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = sys.diag[i] > 0.0 ? in[i] / sys.diag[i] : in[i];
  };
  auto objective = [&]() {
    // x^T A x - 2 b^T x + c with A x = b - r.
    double s = sys.constant;
    for (std::size_t i = 0; i < n; ++i) s -= x[i] * (r[i] + sys.rhs[i]);
    return s;
  };

  const double threshold = params.tolerance * std::max(std::sqrt(dot(sys.rhs, sys.rhs)), 1e-300);
  if (params.record_trace) result.objective_trace.push_back(objective());

  precondition(r, z);
  p = z;
  double rz = dot(r, z);
  bool converged = std::sqrt(dot(r, r)) <= threshold;
  int iter = 0;
  while (!converged && iter < params.max_iterations) {
    sys.multiply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    ++iter;
    if (params.record_trace) result.objective_trace.push_back(objective());
    if (std::sqrt(dot(r, r)) <= threshold) {
      converged = true;
      break;
    }
    precondition(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }

  const int w = d.width();
  for (int y = 0; y < d.height(); ++y) {
    for (int xx = 0; xx < w; ++xx) {
      const int i = sys.index[static_cast<std::size_t>(y) * w + xx];
      if (i >= 0) result.disparity(xx, y) = x[static_cast<std::size_t>(i)];
    }
  }
  result.converged = converged;
  result.iterations = iter;
  return result;
}

}  // namespace branchdepth
