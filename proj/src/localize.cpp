#include "branchdepth/localize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "branchdepth/error.hpp"

namespace branchdepth {

void BranchPointSet::validate(int width, int height) const {
  if (points.size() < 3) {
    throw ValidationError("insufficient points: need at least 3, got " + std::to_string(points.size()));
  }
  for (const PixelPoint& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0.0 || p.y < 0.0 ||
        p.x > width - 1.0 || p.y > height - 1.0) {
      throw ValidationError("branch point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                            ") lies outside the image");
    }
  }
}

namespace {

double squared_distance(const PixelPoint& a, const PixelPoint& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

bool pixel_in_image(const PixelPoint& p, int width, int height, int& px, int& py) {
  const long rx = std::lround(p.x);
  const long ry = std::lround(p.y);
  if (rx < 0 || ry < 0 || rx >= width || ry >= height) return false;
  px = static_cast<int>(rx);
  py = static_cast<int>(ry);
  return true;
}

}  // namespace

std::vector<Triangle> group_triangles(const BranchPointSet& set) {
  const auto& pts = set.points;
  if (pts.size() < 3) {
    throw ValidationError("insufficient points: need at least 3, got " + std::to_string(pts.size()));
  }
  std::vector<bool> used(pts.size(), false);
  std::vector<Triangle> triangles;
  triangles.reserve(pts.size() / 3);
  for (std::size_t seed = 0; seed < pts.size() && triangles.size() < pts.size() / 3; ++seed) {
    if (used[seed]) continue;
    std::array<std::size_t, 2> nearest{pts.size(), pts.size()};
    std::array<double, 2> best{std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::infinity()};
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (used[j] || j == seed) continue;
      const double dist = squared_distance(pts[seed], pts[j]);
      // Strict comparison keeps the lower index on ties.
      if (dist < best[0]) {
        best[1] = best[0];
        nearest[1] = nearest[0];
        best[0] = dist;
        nearest[0] = j;
      } else if (dist < best[1]) {
        best[1] = dist;
        nearest[1] = j;
      }
    }
    Triangle tri;
    tri.indices = {seed, nearest[0], nearest[1]};
    for (std::size_t v = 0; v < 3; ++v) {
      used[tri.indices[v]] = true;
      tri.vertices[v] = pts[tri.indices[v]];
    }
    triangles.push_back(tri);
  }
  return triangles;
}

std::vector<PixelPoint> centroids_of(std::span<const Triangle> triangles) {
  std::vector<PixelPoint> out;
  out.reserve(triangles.size());
  for (const Triangle& t : triangles) {
    out.push_back({(t.vertices[0].x + t.vertices[1].x + t.vertices[2].x) / 3.0,
                   (t.vertices[0].y + t.vertices[1].y + t.vertices[2].y) / 3.0});
  }
  return out;
}

std::vector<PixelPoint> SampleSet::combined() const {
  std::vector<PixelPoint> all = expanded;
  all.insert(all.end(), centroids.begin(), centroids.end());
  return all;
}

SampleSet expand_samples(std::span<const PixelPoint> centroids, int m, double pattern_radius,
                         int width, int height) {
  if (m < 0) throw ValidationError("expansion count m must be non-negative");
  if (!(pattern_radius >= 0.0)) throw ValidationError("pattern radius must be non-negative");
  SampleSet set;
  set.centroids.assign(centroids.begin(), centroids.end());
  for (const PixelPoint& c : centroids) {
    for (int j = 0; j < m; ++j) {
      const double angle = 2.0 * std::numbers::pi * j / m;
      // Snap the trigonometric round-off so axis-aligned samples land exactly.
      const double cx = std::round(std::cos(angle) * 1e12) / 1e12;
      const double sy = std::round(std::sin(angle) * 1e12) / 1e12;
      const PixelPoint p{c.x + pattern_radius * cx, c.y + pattern_radius * sy};
      int px = 0;
      int py = 0;
      if (pixel_in_image(p, width, height, px, py)) {
        set.expanded.push_back(p);
      } else {
        ++set.clipped;
      }
    }
  }
  return set;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw NumericError("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

MadResult mad_filter(std::span<const double> depths, double k) {
  if (depths.empty()) throw NumericError("no valid depth samples");
  if (!(k >= 0.0)) throw ValidationError("MAD rejection threshold k must be non-negative");
  MadResult result;
  result.k = k;
  std::vector<double> values(depths.begin(), depths.end());
  result.median = median_of(values);
  std::vector<double> deviations;
  deviations.reserve(values.size());
  for (double z : values) deviations.push_back(std::abs(z - result.median));
  result.mad = median_of(deviations);

  const bool disabled = std::isinf(k);
  const double limit = k * result.mad;
  for (double z : values) {
    bool keep;
    if (disabled) {
      keep = true;
    } else if (result.mad == 0.0) {
      keep = z == result.median;
    } else {
      keep = std::abs(z - result.median) <= limit;
    }
    if (keep) {
      result.retained.push_back(z);
    } else {
      ++result.rejected;
    }
  }
  if (result.retained.empty()) throw NumericError("MAD filter rejected every sample");
  double sum = 0.0;
  for (double z : result.retained) sum += z;
  result.mean = sum / static_cast<double>(result.retained.size());
  return result;
}

std::string_view to_string(LocalizeMethod method) {
  return method == LocalizeMethod::centroid ? "centroid" : "polygon";
}

LocalizeMethod localize_method_from_string(std::string_view name) {
  if (name == "centroid") return LocalizeMethod::centroid;
  if (name == "polygon") return LocalizeMethod::polygon;
  throw ValidationError("unknown localisation method '" + std::string(name) + "'");
}

void validate(const LocalizeParams& params) {
  if (params.m < 0) throw ValidationError("expansion count m must be non-negative");
  if (!(params.pattern_radius >= 0.0)) throw ValidationError("pattern radius must be non-negative");
  if (!(params.k >= 0.0)) throw ValidationError("MAD threshold k must be non-negative");
}

std::vector<std::array<int, 2>> polygon_interior(std::span<const PixelPoint> polygon, int width,
                                                 int height) {
  std::vector<std::array<int, 2>> inside;
  if (polygon.size() < 3) return inside;
  double min_y = polygon[0].y;
  double max_y = polygon[0].y;
  for (const PixelPoint& p : polygon) {
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const int y0 = std::max(0, static_cast<int>(std::ceil(min_y)));
  const int y1 = std::min(height - 1, static_cast<int>(std::floor(max_y)));
  std::vector<double> crossings;
  for (int y = y0; y <= y1; ++y) {
    crossings.clear();
    const double sy = y;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
      const PixelPoint& a = polygon[i];
      const PixelPoint& b = polygon[(i + 1) % polygon.size()];
      // Half-open rule so a vertex on the scanline is counted once.
      if ((a.y > sy) != (b.y > sy)) {
        crossings.push_back(a.x + (sy - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    // Centres strictly between paired crossings are inside; centres exactly on
    // an edge are not.
    for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) {
      const int xa = std::max(0, static_cast<int>(std::floor(crossings[i])) + 1);
      const int xb = std::min(width - 1, static_cast<int>(std::ceil(crossings[i + 1])) - 1);
      for (int x = xa; x <= xb; ++x) {
        if (x > crossings[i] && x < crossings[i + 1]) inside.push_back({x, y});
      }
    }
  }
  return inside;
}

DistanceEstimate estimate_distance(const DisparityMap& disp, const StereoRig& rig,
                                   const BranchPointSet& set, const LocalizeParams& params) {
  validate(params);
  set.validate(disp.width(), disp.height());

  DistanceEstimate est;
  est.method = params.method;
  est.k = params.k;

  if (params.method == LocalizeMethod::centroid) {
    const std::vector<Triangle> triangles = group_triangles(set);
    const std::vector<PixelPoint> centroids = centroids_of(triangles);
    const SampleSet samples =
        expand_samples(centroids, params.m, params.pattern_radius, disp.width(), disp.height());
    est.samples = samples.combined();
    est.clipped = samples.clipped;
  } else {
    for (const auto& px : polygon_interior(set.points, disp.width(), disp.height())) {
      est.samples.push_back({static_cast<double>(px[0]), static_cast<double>(px[1])});
    }
  }

  std::vector<double> depths;
  depths.reserve(est.samples.size());
  for (const PixelPoint& s : est.samples) {
    int px = 0;
    int py = 0;
    if (!pixel_in_image(s, disp.width(), disp.height(), px, py)) {
      ++est.skipped_invalid;
      continue;
    }
    const double d = disp(px, py);
    if (!is_valid_disparity(d) || !(d > 0.0)) {
      ++est.skipped_invalid;
      continue;
    }
    depths.push_back(disparity_to_depth(rig, d));
  }
  if (depths.empty()) throw NumericError("no valid depth samples around the branch");

  MadResult mad = mad_filter(depths, params.k);
  est.distance = mad.mean;
  est.median_depth = mad.median;
  est.mad = mad.mad;
  est.retained_count = mad.retained.size();
  est.rejected_count = mad.rejected;
  est.retained_depths = std::move(mad.retained);
  return est;
}

BranchPointSet points_from_json(const nlohmann::json& j) {
  BranchPointSet set;
  try {
    for (const auto& p : j.at("points")) {
      if (!p.is_array() || p.size() != 2) throw ValidationError("each point must be [x, y]");
      set.points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed points: ") + e.what());
  }
  return set;
}

nlohmann::json points_to_json(const BranchPointSet& set) {
  nlohmann::json pts = nlohmann::json::array();
  for (const PixelPoint& p : set.points) pts.push_back({p.x, p.y});
  return {{"points", pts}};
}

nlohmann::json estimate_to_json(const DistanceEstimate& estimate, const LocalizeParams& params) {
  const auto finite_or_null = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  return {{"distance_m", estimate.distance},
          {"median_m", estimate.median_depth},
          {"mad_m", estimate.mad},
          {"k", finite_or_null(estimate.k)},
          {"method", std::string(to_string(estimate.method))},
          {"retained", estimate.retained_count},
          {"rejected", estimate.rejected_count},
          {"skipped_invalid", estimate.skipped_invalid},
          {"clipped", estimate.clipped},
          {"params",
           {{"method", std::string(to_string(params.method))},
            {"k", finite_or_null(params.k)},
            {"m", params.m},
            {"pattern_radius", params.pattern_radius}}}};
}

}  // namespace branchdepth
