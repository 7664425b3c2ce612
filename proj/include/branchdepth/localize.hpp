#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "branchdepth/geometry.hpp"
#include "branchdepth/image.hpp"

namespace branchdepth {

/// Image position in pixels; integer values are pixel centres.
struct PixelPoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// Ordered points outlining a branch, as produced by upstream segmentation.
struct BranchPointSet {
  std::vector<PixelPoint> points;

  /// Throws ValidationError unless there are at least 3 points, all inside a
  /// width x height image.
  void validate(int width, int height) const;
};

struct Triangle {
  std::array<std::size_t, 3> indices{};
  std::array<PixelPoint, 3> vertices{};
};

/// Greedy grouping: the unused point with the smallest index takes its two
/// nearest unused neighbours (ties by index). Leftover points are unused.
std::vector<Triangle> group_triangles(const BranchPointSet& set);

std::vector<PixelPoint> centroids_of(std::span<const Triangle> triangles);

struct SampleSet {
  std::vector<PixelPoint> centroids;  // P'
  std::vector<PixelPoint> expanded;   // P''
  std::size_t clipped = 0;            // ring samples dropped at the image border

  /// P''' = P'' + P' as a multiset: expanded samples followed by centroids.
  std::vector<PixelPoint> combined() const;
};

/// Places m samples around each centroid at angles 2*pi*j/m on a ring of the
/// given radius, starting along +x (j = 1 lands on +y, image down). Samples
/// whose nearest pixel falls outside the image are dropped and counted.
SampleSet expand_samples(std::span<const PixelPoint> centroids, int m, double pattern_radius,
                         int width, int height);

struct MadResult {
  double median = 0.0;
  double mad = 0.0;
  double k = 0.0;
  std::vector<double> retained;
  std::size_t rejected = 0;
  double mean = 0.0;  // mean of retained
};

/// Keeps z with |z - median| <= k * MAD. When MAD is zero only values equal
/// to the median survive. k = +infinity disables rejection.
MadResult mad_filter(std::span<const double> depths, double k);

/// Median of a non-empty sample; even counts average the two middle values.
double median_of(std::vector<double> values);

enum class LocalizeMethod { centroid, polygon };

std::string_view to_string(LocalizeMethod method);
LocalizeMethod localize_method_from_string(std::string_view name);

struct LocalizeParams {
  LocalizeMethod method = LocalizeMethod::centroid;
  int m = 4;
  double pattern_radius = 2.0;
  double k = 3.0;
};

void validate(const LocalizeParams& params);

struct DistanceEstimate {
  LocalizeMethod method = LocalizeMethod::centroid;
  double distance = 0.0;      // metres, mean of retained depths
  double median_depth = 0.0;  // metres
  double mad = 0.0;           // metres
  double k = 0.0;
  std::size_t retained_count = 0;
  std::size_t rejected_count = 0;
  std::size_t skipped_invalid = 0;  // samples on invalid or non-positive disparity
  std::size_t clipped = 0;          // ring samples outside the image
  std::vector<PixelPoint> samples;  // every sample looked up, in order
  std::vector<double> retained_depths;
};

/// Pixels whose centres lie inside the closed polygon through the points in
/// order, even-odd rule.
std::vector<std::array<int, 2>> polygon_interior(std::span<const PixelPoint> polygon, int width,
                                                 int height);

/// Depth samples around the branch -> MAD filter -> mean. The centroid method
/// samples triangle centroids and their rings; the polygon method samples
/// every interior pixel of the outline.
DistanceEstimate estimate_distance(const DisparityMap& disp, const StereoRig& rig,
                                   const BranchPointSet& set, const LocalizeParams& params);

// points.json: {"points": [[x, y], ...]}
BranchPointSet points_from_json(const nlohmann::json& j);
nlohmann::json points_to_json(const BranchPointSet& set);

// result.json fields plus the effective parameters.
nlohmann::json estimate_to_json(const DistanceEstimate& estimate, const LocalizeParams& params);

}  // namespace branchdepth
