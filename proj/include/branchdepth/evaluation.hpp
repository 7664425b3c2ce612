#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "branchdepth/image.hpp"

namespace branchdepth {

struct RmseResult {
  double rmse = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;  // pairs where either side was non-finite
};

/// Root mean squared error over pairs where both values are finite.
RmseResult rmse(std::span<const double> actual, std::span<const double> predicted);
RmseResult rmse(const DisparityMap& predicted, const DisparityMap& ground_truth);

struct BadPixelResult {
  double rate = 0.0;
  std::size_t bad = 0;
  std::size_t used = 0;
};

/// Fraction of pixels valid in both maps with |pred - gt| > tau.
BadPixelResult bad_pixel_rate(const DisparityMap& predicted, const DisparityMap& ground_truth,
                              double tau);

/// |a & b| / |a | b|; two empty masks count as perfect agreement (1.0).
double mask_iou(const Mask& a, const Mask& b);

struct Instance {
  Mask mask;
  double score = 1.0;
};

struct MapEvalParams {
  std::array<double, 10> iou_thresholds{0.50, 0.55, 0.60, 0.65, 0.70,
                                        0.75, 0.80, 0.85, 0.90, 0.95};
  /// 101-point interpolated precision; false selects trapezoidal area under
  /// the raw precision-recall curve.
  bool interpolated = true;
};

void validate(const MapEvalParams& params);

struct MapResult {
  double map = 0.0;
  std::array<double, 10> ap{};
  bool empty_ground_truth = false;  // predictions scored against nothing
};

/// Average precision at one IoU threshold. Predictions are taken by
/// descending score and matched one-to-one to the unmatched ground truth
/// with the highest IoU >= threshold.
double average_precision(std::span<const Instance> predictions,
                         std::span<const Instance> ground_truth, double iou_threshold,
                         bool interpolated = true);

/// Mean of AP over the ten IoU thresholds 0.50:0.05:0.95.
MapResult map_50_95(std::span<const Instance> predictions, std::span<const Instance> ground_truth,
                    const MapEvalParams& params = {});

struct DepthHistogram {
  std::vector<double> edges;  // bins + 1 values
  std::vector<std::size_t> counts;
  std::size_t samples = 0;
  double median = 0.0;
  double mad = 0.0;
  double retained_mean = 0.0;  // mean after MAD rejection with k
};

DepthHistogram depth_histogram(std::span<const double> samples, int bins, double k = 3.0);

/// "bin_lo,bin_hi,count" header plus one row per bin.
std::string histogram_csv(const DepthHistogram& histogram);
nlohmann::json histogram_to_json(const DepthHistogram& histogram);

}  // namespace branchdepth
