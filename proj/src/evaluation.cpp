#include "branchdepth/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "branchdepth/localize.hpp"

namespace branchdepth {

RmseResult rmse(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) {
    throw ValidationError("rmse: sequences differ in length");
  }
  RmseResult r;
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (!std::isfinite(actual[i]) || !std::isfinite(predicted[i])) {
      ++r.excluded;
      continue;
    }
    const double diff = actual[i] - predicted[i];
    sum += diff * diff;
    ++r.used;
  }
  if (r.used == 0) throw NumericError("rmse undefined: no valid pairs");
  r.rmse = std::sqrt(sum / static_cast<double>(r.used));
  return r;
}

RmseResult rmse(const DisparityMap& predicted, const DisparityMap& ground_truth) {
  require_same_shape(predicted, ground_truth, "rmse");
  return rmse(ground_truth.pixels(), predicted.pixels());
}

BadPixelResult bad_pixel_rate(const DisparityMap& predicted, const DisparityMap& ground_truth,
                              double tau) {
  require_same_shape(predicted, ground_truth, "bad_pixel_rate");
  if (!(tau >= 0.0)) throw ValidationError("bad-pixel threshold must be non-negative");
  BadPixelResult r;
  auto p = predicted.pixels();
  auto g = ground_truth.pixels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!is_valid_disparity(p[i]) || !is_valid_disparity(g[i])) continue;
    ++r.used;
    if (std::abs(p[i] - g[i]) > tau) ++r.bad;
  }
  if (r.used == 0) throw NumericError("bad-pixel rate undefined: no mutually valid pixels");
  r.rate = static_cast<double>(r.bad) / static_cast<double>(r.used);
  return r;
}

double mask_iou(const Mask& a, const Mask& b) {
  require_same_shape(a, b, "mask_iou");
  std::size_t inter = 0;
  std::size_t uni = 0;
  auto pa = a.pixels();
  auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const bool ia = pa[i] != 0;
    const bool ib = pb[i] != 0;
    inter += (ia && ib) ? 1 : 0;
    uni += (ia || ib) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

void validate(const MapEvalParams& params) {
  for (std::size_t i = 0; i < params.iou_thresholds.size(); ++i) {
    const double t = params.iou_thresholds[i];
    if (!(t > 0.0 && t <= 1.0)) throw ValidationError("IoU thresholds must lie in (0, 1]");
    if (i > 0 && !(t > params.iou_thresholds[i - 1])) {
      throw ValidationError("IoU thresholds must be ascending");
    }
  }
}

namespace {

std::vector<std::size_t> order_by_score(std::span<const Instance> predictions) {
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].score > predictions[b].score;
  });
  return order;
}

double ap_from_curve(const std::vector<double>& recall, std::vector<double> precision,
                     bool interpolated) {
  if (recall.empty()) return 0.0;
  if (!interpolated) {
    double area = 0.0;
    double prev_r = 0.0;
    double prev_p = precision.front();
    for (std::size_t i = 0; i < recall.size(); ++i) {
      area += (recall[i] - prev_r) * 0.5 * (precision[i] + prev_p);
      prev_r = recall[i];
      prev_p = precision[i];
    }
    return area;
  }
  for (std::size_t i = precision.size() - 1; i > 0; --i) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

}  // namespace

double average_precision(std::span<const Instance> predictions,
                         std::span<const Instance> ground_truth, double iou_threshold,
                         bool interpolated) {
  if (ground_truth.empty()) {
    if (predictions.empty()) throw NumericError("average precision undefined: no instances");
    return 0.0;
  }
  const std::vector<std::size_t> order = order_by_score(predictions);
  std::vector<bool> matched(ground_truth.size(), false);
  std::vector<double> recall;
  std::vector<double> precision;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t idx : order) {
    double best_iou = -1.0;
    std::size_t best_gt = ground_truth.size();
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (matched[g]) continue;
      const double iou = mask_iou(predictions[idx].mask, ground_truth[g].mask);
      if (iou >= iou_threshold && iou > best_iou) {
        best_iou = iou;
        best_gt = g;
      }
    }
    if (best_gt < ground_truth.size()) {
      matched[best_gt] = true;
      ++tp;
    } else {
      ++fp;
    }
    recall.push_back(static_cast<double>(tp) / static_cast<double>(ground_truth.size()));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  return ap_from_curve(recall, precision, interpolated);
}

MapResult map_50_95(std::span<const Instance> predictions, std::span<const Instance> ground_truth,
                    const MapEvalParams& params) {
  validate(params);
  MapResult result;
  if (ground_truth.empty()) {
    if (predictions.empty()) throw NumericError("mAP undefined: no predictions and no ground truth");
    result.empty_ground_truth = true;
    return result;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < params.iou_thresholds.size(); ++i) {
    result.ap[i] = average_precision(predictions, ground_truth, params.iou_thresholds[i],
                                     params.interpolated);
    sum += result.ap[i];
  }
  result.map = sum / static_cast<double>(params.iou_thresholds.size());
  return result;
}

DepthHistogram depth_histogram(std::span<const double> samples, int bins, double k) {
  if (samples.empty()) throw NumericError("depth histogram needs at least one sample");
  if (bins < 1) throw ValidationError("depth histogram needs at least one bin");
  DepthHistogram h;
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) h.edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / bins;
  h.edges.back() = hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double z : samples) {
    int bin = 0;
    if (hi > lo) bin = std::min(bins - 1, static_cast<int>(std::floor((z - lo) / (hi - lo) * bins)));
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  h.samples = samples.size();
  const MadResult mad = mad_filter(samples, k);
  h.median = mad.median;
  h.mad = mad.mad;
  h.retained_mean = mad.mean;
  return h;
}

std::string histogram_csv(const DepthHistogram& histogram) {
  std::ostringstream out;
  out.precision(17);
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < histogram.counts.size(); ++i) {
    out << histogram.edges[i] << ',' << histogram.edges[i + 1] << ',' << histogram.counts[i] << '\n';
  }
  return out.str();
}

nlohmann::json histogram_to_json(const DepthHistogram& histogram) {
  return {{"edges", histogram.edges},
          {"counts", histogram.counts},
          {"samples", histogram.samples},
          {"median_m", histogram.median},
          {"mad_m", histogram.mad},
          {"retained_mean_m", histogram.retained_mean}};
}

}  // namespace branchdepth
