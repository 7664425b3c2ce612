#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "branchdepth/error.hpp"
#include "branchdepth/evaluation.hpp"

using namespace branchdepth;

namespace {

Mask rect(int w, int h, int x0, int y0, int x1, int y1) {
  Mask m(w, h, 0);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m(x, y) = 1;
  return m;
}

}  // namespace

TEST_CASE("rmse") {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{1, 2, 4};
  CHECK(rmse(a, a).rmse == 0.0);
  const RmseResult r = rmse(a, b);
  CHECK(std::abs(r.rmse - 0.57735) <= 1e-5);
  CHECK(r.rmse * r.rmse == doctest::Approx(1.0 / 3.0));
  CHECK(r.used == 3);

  const std::vector<double> holes{1, std::numeric_limits<double>::infinity(), 5};
  const RmseResult partial = rmse(holes, b);
  CHECK(partial.used == 2);
  CHECK(partial.excluded == 1);
  CHECK(partial.rmse == doctest::Approx(std::sqrt(0.5)));

  CHECK_THROWS_AS(rmse(a, std::vector<double>{1, 2}), ValidationError);
  CHECK_THROWS_AS(rmse(std::vector<double>{kInvalidDisparity}, std::vector<double>{1}), NumericError);

  DisparityMap p(3, 2, 4.0);
  DisparityMap g(3, 2, 4.0);
  CHECK(rmse(p, g).rmse == 0.0);
  CHECK_THROWS_AS(rmse(p, DisparityMap(2, 3, 4.0)), ValidationError);
}

TEST_CASE("bad-pixel rate") {
  DisparityMap gt(10, 10, 12.0);
  DisparityMap pred = gt;
  CHECK(bad_pixel_rate(pred, gt, 1.0).rate == 0.0);
  pred(3, 4) = 14.0;
  const BadPixelResult r = bad_pixel_rate(pred, gt, 1.0);
  CHECK(r.rate == doctest::Approx(0.01));
  CHECK(r.bad == 1);
  CHECK(r.used == 100);
  CHECK(bad_pixel_rate(pred, gt, std::numeric_limits<double>::infinity()).rate == 0.0);
  pred.invalidate(0, 0);
  CHECK(bad_pixel_rate(pred, gt, 1.0).used == 99);
  CHECK_THROWS_AS(bad_pixel_rate(pred, gt, -0.5), ValidationError);
}

TEST_CASE("mask IoU") {
  const Mask a = rect(20, 10, 0, 0, 8, 10);
  CHECK(mask_iou(a, a) == 1.0);
  CHECK(mask_iou(a, rect(20, 10, 10, 0, 18, 10)) == 0.0);
  CHECK(std::abs(mask_iou(a, rect(20, 10, 4, 0, 12, 10)) - 1.0 / 3.0) <= 1e-9);
  CHECK(mask_iou(Mask(4, 4, 0), Mask(4, 4, 0)) == 1.0);
  CHECK_THROWS_AS(mask_iou(a, Mask(4, 4, 0)), ValidationError);
}

TEST_CASE("average precision and mAP") {
  const std::vector<Instance> gt{{rect(30, 30, 0, 0, 10, 10), 1.0}, {rect(30, 30, 15, 15, 25, 22), 1.0}};
  std::vector<Instance> perfect{{gt[0].mask, 0.3}, {gt[1].mask, 0.8}};
  const MapResult m = map_50_95(perfect, gt);
  CHECK(m.map == 1.0);
  for (double ap : m.ap) CHECK(ap == 1.0);

  const std::vector<Instance> miss{{rect(30, 30, 26, 26, 30, 30), 0.9}};
  CHECK(map_50_95(miss, gt).map == 0.0);

  SUBCASE("two predictions against one ground truth") {
    // Same instance as tests/oracles/ap_reference.py, which prints mAP 0.9.
    const std::vector<Instance> one{{rect(10, 10, 0, 0, 10, 1), 1.0}};
    Mask b(10, 10, 0);
    b(0, 0) = 1;
    b(1, 0) = 1;
    for (int x = 0; x < 8; ++x) b(x, 5) = 1;
    const std::vector<Instance> preds{{rect(10, 10, 0, 0, 9, 1), 0.9}, {b, 0.8}};
    CHECK(mask_iou(preds[0].mask, one[0].mask) == doctest::Approx(0.9));
    CHECK(mask_iou(preds[1].mask, one[0].mask) == doctest::Approx(2.0 / 18.0));
    const MapResult r = map_50_95(preds, one);
    for (int i = 0; i < 9; ++i) CHECK(r.ap[i] == doctest::Approx(1.0));
    CHECK(r.ap[9] == 0.0);
    CHECK(r.map == doctest::Approx(0.9).epsilon(1e-12));
  }

  SUBCASE("precision below one") {
    // A false positive ranked first halves precision at full recall.
    const std::vector<Instance> one{{rect(10, 10, 0, 0, 5, 5), 1.0}};
    const std::vector<Instance> preds{{rect(10, 10, 6, 6, 9, 9), 0.9}, {rect(10, 10, 0, 0, 5, 5), 0.5}};
    CHECK(average_precision(preds, one, 0.5) == doctest::Approx(0.5));
    // Raw curve (0, 0) -> (1, 0.5): trapezoid area 0.25.
    CHECK(average_precision(preds, one, 0.5, false) == doctest::Approx(0.25));
  }

  SUBCASE("empty inputs") {
    const MapResult e = map_50_95(perfect, std::vector<Instance>{});
    CHECK(e.map == 0.0);
    CHECK(e.empty_ground_truth);
    CHECK_THROWS_AS(map_50_95(std::vector<Instance>{}, std::vector<Instance>{}), NumericError);
    CHECK(map_50_95(std::vector<Instance>{}, gt).map == 0.0);
  }

  MapEvalParams bad;
  bad.iou_thresholds[3] = 1.5;
  CHECK_THROWS_AS(map_50_95(perfect, gt, bad), ValidationError);
}

TEST_CASE("depth histogram") {
  const std::vector<double> single{1.7};
  const DepthHistogram s = depth_histogram(single, 5);
  int nonzero = 0;
  for (std::size_t c : s.counts) nonzero += c > 0 ? 1 : 0;
  CHECK(nonzero == 1);
  CHECK(s.samples == 1);

  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(1.0, 2.0);
  std::vector<double> samples(5000);
  for (double& v : samples) v = u(rng);
  const DepthHistogram h = depth_histogram(samples, 10);
  REQUIRE(h.counts.size() == 10);
  CHECK(h.edges.size() == 11);
  std::size_t total = 0;
  double chi2 = 0.0;
  for (std::size_t c : h.counts) {
    total += c;
    chi2 += (c - 500.0) * (c - 500.0) / 500.0;
  }
  CHECK(total == 5000);
  CHECK(chi2 < 27.9);  // 99.9th percentile of chi-square with 9 degrees of freedom
  CHECK(h.median == doctest::Approx(1.5).epsilon(0.02));

  const std::string csv = histogram_csv(h);
  std::istringstream lines(csv);
  std::string line;
  int rows = 0;
  std::getline(lines, line);
  CHECK(line == "bin_lo,bin_hi,count");
  while (std::getline(lines, line)) rows += line.empty() ? 0 : 1;
  CHECK(rows == 10);

  const nlohmann::json j = histogram_to_json(h);
  CHECK(j.at("counts").size() == 10);

  CHECK_THROWS_AS(depth_histogram(std::vector<double>{}, 4), NumericError);
  CHECK_THROWS_AS(depth_histogram(samples, 0), ValidationError);
}
