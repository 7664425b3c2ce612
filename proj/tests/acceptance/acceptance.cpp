// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "branchdepth/aggregation.hpp"
#include "branchdepth/cost_volume.hpp"
#include "branchdepth/evaluation.hpp"
#include "branchdepth/geometry.hpp"
#include "branchdepth/io.hpp"
#include "branchdepth/localize.hpp"
#include "branchdepth/pipeline.hpp"
#include "branchdepth/refine.hpp"
#include "branchdepth/synth.hpp"

using namespace branchdepth;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

GrayImage random_image(int w, int h, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> level(0, 255);
  GrayImage img(w, h);
  for (double& v : img.pixels()) v = level(rng);
  return img;
}

int run_cli(const std::string& args, std::string* out = nullptr) {
  const std::string cmd = std::string(BRANCHDEPTH_CLI) + " " + args;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return -1;
  char buf[4096];
  std::size_t n = 0;
  std::string text;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) text.append(buf, n);
  const int status = pclose(pipe);
  if (out != nullptr) *out = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// 1 --------------------------------------------------------------------------
Outcome geometry_round_trip() {
  const auto t0 = Clock::now();
  const StereoRig rig(700.0, 690.0, 320.0, 240.0, 0.063);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> xy(-3.0, 3.0);
  std::uniform_real_distribution<double> depth(0.1, 30.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const WorldPoint p{xy(rng), xy(rng), depth(rng)};
    const WorldPoint r = triangulate(rig, project(rig, p));
    const double norm = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
    const double err = std::sqrt((r.x - p.x) * (r.x - p.x) + (r.y - p.y) * (r.y - p.y) + (r.z - p.z) * (r.z - p.z));
    worst = std::max(worst, err / norm);
  }
  const double t = seconds_since(t0);
  return {worst < 1e-9 && t < 1.0, fmt("max relative error %.3e, %.3f s", worst, t)};
}

// 2 --------------------------------------------------------------------------
Outcome brute_force_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2);
  int mismatches = 0;
  long cells = 0;
  for (int pair = 0; pair < 10; ++pair) {
    const GrayImage left = random_image(16, 16, rng);
    const GrayImage right = random_image(16, 16, rng);
    for (CostKind kind : {CostKind::ad, CostKind::sd}) {
      const CostVolume cv = build_cost_volume(left, right, {0, {0, 7}}, kind);
      const DisparityMap wta = select_wta(cv);
      for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
          double best = std::numeric_limits<double>::infinity();
          int arg = -1;
          for (int d = 0; d < 8; ++d) {
            double c = std::numeric_limits<double>::infinity();
            if (x - d >= 0) {
              const double diff = left(x, y) - right(x - d, y);
              c = kind == CostKind::ad ? std::abs(diff) : diff * diff;
            }
            if (cv.at(x, y, d) != c) ++mismatches;
            ++cells;
            if (c < best) {
              best = c;
              arg = d;
            }
          }
          if (wta(x, y) != arg) ++mismatches;
        }
      }
    }
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < 5.0, fmt("%ld cells + WTA, %d mismatches, %.3f s", cells, mismatches, t)};
}

// 3, 4 -----------------------------------------------------------------------
constexpr int kShiftWidth = 320;
constexpr int kShiftHeight = 240;
constexpr int kShiftRadius = 4;
const DisparityRange kShiftRange{0, 39};

template <typename F>
void for_interior(const RenderedPair& pair, F&& f) {
  for (int y = kShiftRadius; y < kShiftHeight - kShiftRadius; ++y) {
    for (int x = kShiftRadius; x < kShiftWidth - kShiftRadius; ++x) {
      if (!pair.occlusion_left(x, y)) f(x, y);
    }
  }
}

Outcome constant_shift() {
  const StereoRig rig = preset_rig(kShiftWidth, kShiftHeight);
  bool pass = true;
  std::string detail;
  for (int s : {3, 10, 25}) {
    const RenderedPair pair = render_pair(plane_scene(s, rig, kShiftWidth, kShiftHeight, 7), rig);
    const auto t0 = Clock::now();
    const CostVolume raw = build_cost_volume(pair.left, pair.right, {kShiftRadius, kShiftRange}, CostKind::ad);
    const CostVolume boxed = aggregate_fixed(raw, kShiftRadius);
    const DisparityMap fixed = select_wta(boxed);
    const DisparityMap sgm = select_wta(aggregate_semiglobal(boxed, {1.0, 200.0, 1600.0, 8}));
    const double t = seconds_since(t0);
    int n = 0;
    int good_fixed = 0;
    int good_sgm = 0;
    for_interior(pair, [&](int x, int y) {
      ++n;
      good_fixed += fixed.valid(x, y) && std::abs(fixed(x, y) - pair.gt_left(x, y)) <= 1.0 ? 1 : 0;
      good_sgm += sgm.valid(x, y) && std::abs(sgm(x, y) - pair.gt_left(x, y)) <= 1.0 ? 1 : 0;
    });
    const double f = static_cast<double>(good_fixed) / n;
    const double g = static_cast<double>(good_sgm) / n;
    pass = pass && f >= 0.95 && g >= 0.99 && t < 10.0;
    detail += fmt("s=%d fixed %.4f sgm %.4f %.2f s; ", s, f, g, t);
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

Outcome subpixel_gain() {
  const StereoRig rig = preset_rig(kShiftWidth, kShiftHeight);
  const RenderedPair pair = render_pair(plane_scene(25.4, rig, kShiftWidth, kShiftHeight, 8), rig);
  const CostVolume boxed = aggregate_fixed(
      build_cost_volume(pair.left, pair.right, {kShiftRadius, kShiftRange}, CostKind::ad), kShiftRadius);
  const DisparityMap wta = select_wta(boxed);
  const DisparityMap sub = subpixel_refine(wta, boxed);
  std::vector<double> gt;
  std::vector<double> a;
  std::vector<double> b;
  for_interior(pair, [&](int x, int y) {
    gt.push_back(pair.gt_left(x, y));
    a.push_back(wta(x, y));
    b.push_back(sub(x, y));
  });
  const double e_wta = rmse(gt, a).rmse;
  const double e_sub = rmse(gt, b).rmse;
  return {e_sub < e_wta && e_sub <= 0.25, fmt("rmse integer %.4f, sub-pixel %.4f px", e_wta, e_sub)};
}

// 5 --------------------------------------------------------------------------
Outcome scanline_optimality() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> cost(0.0, 20.0);
  std::uniform_real_distribution<double> penalty(0.1, 10.0);
  int instances = 0;
  int failures = 0;
  for (int width = 1; width <= 6; ++width) {
    for (int labels = 2; labels <= 4; ++labels) {
      for (int seed = 0; seed < 100; ++seed) {
        CostVolume cv(width, 1, {0, labels - 1});
        for (double& c : cv.cells()) c = cost(rng);
        double p1 = penalty(rng);
        double p2 = penalty(rng);
        if (p1 > p2) std::swap(p1, p2);
        const EnergyParams params{1.0, p1, p2, 1};
        const DisparityMap wta = select_wta(aggregate_semiglobal(cv, params));
        // Exhaustive minimum of the 1-D energy, overall and per final label.
        std::vector<double> best_ending(static_cast<std::size_t>(labels), std::numeric_limits<double>::infinity());
        std::vector<int> lab(static_cast<std::size_t>(width), 0);
        long total = 1;
        for (int i = 0; i < width; ++i) total *= labels;
        for (long code = 0; code < total; ++code) {
          long c = code;
          for (int i = 0; i < width; ++i) {
            lab[i] = static_cast<int>(c % labels);
            c /= labels;
          }
          double e = 0.0;
          for (int i = 0; i < width; ++i) {
            e += cv.at(i, 0, lab[i]);
            if (i > 0) e += smoothness_penalty(lab[i] - lab[i - 1], params);
          }
          best_ending[lab[width - 1]] = std::min(best_ending[lab[width - 1]], e);
        }
        const double global = *std::min_element(best_ending.begin(), best_ending.end());
        const int chosen = static_cast<int>(wta(width - 1, 0));
        if (!(best_ending[chosen] <= global + 1e-9)) ++failures;
        ++instances;
      }
    }
  }
  return {failures == 0, fmt("%d instances (width 1-6, D 2-4), %d disagreements", instances, failures)};
}

// 6 --------------------------------------------------------------------------
std::vector<double> dense_solution(const DisparityMap& d, const GrayImage& guide, double lambda, double sigma) {
  const int w = d.width();
  const int n = w * d.height();
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      const int p = y * w + x;
      a[p][p] += 1.0;
      a[p][n] = d(x, y);
      for (const auto& [qx, qy] : {std::pair{x + 1, y}, std::pair{x, y + 1}}) {
        if (qx >= w || qy >= d.height()) continue;
        const int qi = qy * w + qx;
        const double g = guide(x, y) - guide(qx, qy);
        const double wpq = lambda * std::exp(-g * g / (2.0 * sigma * sigma));
        a[p][p] += wpq;
        a[qi][qi] += wpq;
        a[p][qi] -= wpq;
        a[qi][p] -= wpq;
      }
    }
  }
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (int k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = a[i][n] / a[i][i];
  return x;
}

Outcome wls_monotone() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> disp(2.0, 40.0);
  std::uniform_real_distribution<double> lam(0.1, 5.0);
  std::uniform_real_distribution<double> sig(2.0, 30.0);
  int increases = 0;
  for (int i = 0; i < 20; ++i) {
    const GrayImage guide = random_image(32, 32, rng);
    DisparityMap d(32, 32);
    for (double& v : d.pixels()) v = disp(rng);
    WlsParams p;
    p.lambda = lam(rng);
    p.sigma = sig(rng);
    const WlsResult r = wls_smooth(d, guide, p);
    if (wls_objective(r.disparity, d, guide, p) > wls_objective(d, d, guide, p)) ++increases;
  }
  double worst_gap = 0.0;
  for (int i = 0; i < 20; ++i) {
    const GrayImage guide = random_image(6, 6, rng);
    DisparityMap d(6, 6);
    for (double& v : d.pixels()) v = disp(rng);
    WlsParams p;
    p.lambda = lam(rng);
    p.sigma = sig(rng);
    const WlsResult r = wls_smooth(d, guide, p);
    const std::vector<double> x = dense_solution(d, guide, p.lambda, p.sigma);
    DisparityMap dense(6, 6);
    std::copy(x.begin(), x.end(), dense.pixels().begin());
    worst_gap = std::max(worst_gap, std::abs(wls_objective(r.disparity, d, guide, p) - wls_objective(dense, d, guide, p)));
  }
  return {increases == 0 && worst_gap <= 1e-6,
          fmt("32x32: %d/20 objective increases; 6x6: max |J_solver - J_dense| = %.2e", increases, worst_gap)};
}

// 7 --------------------------------------------------------------------------
Outcome mad_hand_case() {
  const std::vector<double> z{2.0, 2.1, 1.9, 2.05, 8.0};
  const MadResult r = mad_filter(z, 3.0);
  const bool pass = std::abs(r.median - 2.05) <= 1e-12 && std::abs(r.mad - 0.05) <= 1e-12 &&
                    r.retained.size() == 4 && std::abs(r.mean - 2.0125) <= 1e-12;
  return {pass, fmt("median %.15g, MAD %.15g, retained %zu, mean %.15g", r.median, r.mad, r.retained.size(), r.mean)};
}

// 8, 9 -----------------------------------------------------------------------
struct BranchRun {
  fs::path scene_dir;
  fs::path disparity;
};

Outcome end_to_end(const fs::path& work, BranchRun& run_15) {
  const auto t0 = Clock::now();
  bool pass = true;
  std::string detail;
  for (double z : {1.0, 1.5, 2.0}) {
    const fs::path dir = work / fmt("branch_%.1f", z);
    fs::remove_all(dir);
    if (run_cli(fmt("synth --preset branch --distance %.1f --out ", z) + q(dir) + " > /dev/null") != 0) {
      return {false, fmt("synth failed at %.1f m", z)};
    }
    const fs::path disp = dir / "disparity.pfm";
    if (run_cli("disparity --left " + q(dir / "left.pgm") + " --right " + q(dir / "right.pgm") + " --out " + q(disp) +
                " > /dev/null") != 0) {
      return {false, fmt("disparity failed at %.1f m", z)};
    }
    const double tol = z < 1.75 ? 0.05 : 0.10;
    for (const char* method : {"centroid", "polygon"}) {
      std::string out;
      if (run_cli("localize --disparity " + q(disp) + " --points " + q(dir / "points.json") + " --rig " +
                      q(dir / "rig.json") + " --method " + method,
                  &out) != 0) {
        return {false, fmt("localize failed at %.1f m", z)};
      }
      const double est = nlohmann::json::parse(out).at("distance_m").get<double>();
      pass = pass && std::abs(est - z) <= tol;
      detail += fmt("%.1f m %s %.4f; ", z, method, est);
    }
    if (z == 1.5) run_15 = {dir, disp};
  }
  const double t = seconds_since(t0);
  pass = pass && t < 60.0;
  return {pass, detail + fmt("%.1f s", t)};
}

Outcome outlier_robustness(const fs::path& work, const BranchRun& run) {
  if (run.disparity.empty()) return {false, "needs the 1.5 m run of the end-to-end criterion"};
  const StereoRig rig = rig_from_json(read_json(run.scene_dir / "rig.json"));
  const DisparityMap gt = read_pfm(run.scene_dir / "gt.pfm");
  DisparityMap disp = read_pfm(run.disparity);
  const double background = rig.focal_baseline() / 2.5;
  // Branch region: ground truth nearer than halfway to the background plane.
  const double branch_threshold = rig.focal_baseline() / 2.0;
  std::vector<std::pair<int, int>> branch;
  for (int y = 0; y < gt.height(); ++y)
    for (int x = 0; x < gt.width(); ++x)
      if (gt.valid(x, y) && gt(x, y) > branch_threshold) branch.emplace_back(x, y);
  std::mt19937_64 rng(9);
  std::shuffle(branch.begin(), branch.end(), rng);
  const std::size_t replaced = branch.size() / 5;
  for (std::size_t i = 0; i < replaced; ++i) disp(branch[i].first, branch[i].second) = background;
  const fs::path noisy = work / "branch_1.5_outliers.pfm";
  write_pfm(noisy, disp);

  bool pass = true;
  std::string detail = fmt("%zu/%zu branch px replaced; ", replaced, branch.size());
  for (const char* method : {"centroid", "polygon"}) {
    const std::string base = "localize --disparity " + q(noisy) + " --points " + q(run.scene_dir / "points.json") +
                             " --rig " + q(run.scene_dir / "rig.json") + " --method " + method;
    std::string filtered;
    std::string unfiltered;
    if (run_cli(base, &filtered) != 0 || run_cli(base + " --k inf", &unfiltered) != 0) {
      return {false, "localize failed"};
    }
    const double f = nlohmann::json::parse(filtered).at("distance_m").get<double>();
    const double u = nlohmann::json::parse(unfiltered).at("distance_m").get<double>();
    pass = pass && std::abs(f - 1.5) <= 0.05 && std::abs(u - 1.5) > 0.10;
    detail += fmt("%s MAD %.4f, unfiltered %.4f; ", method, f, u);
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

// 10 -------------------------------------------------------------------------
Outcome metrics() {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{1, 2, 4};
  const double e = rmse(a, b).rmse;
  Mask m1(20, 10, 0);
  Mask m2(20, 10, 0);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 8; ++x) m1(x, y) = 1;
    for (int x = 4; x < 12; ++x) m2(x, y) = 1;
  }
  const double iou = mask_iou(m1, m2);
  Mask m3(20, 10, 0);
  for (int y = 6; y < 9; ++y)
    for (int x = 14; x < 19; ++x) m3(x, y) = 1;
  const std::vector<Instance> gt{{m1, 1.0}, {m3, 1.0}};
  const std::vector<Instance> pred{{m3, 0.4}, {m1, 0.9}};
  const double map = map_50_95(pred, gt).map;
  const bool pass = std::abs(e - 0.57735) <= 1e-5 && std::abs(iou - 1.0 / 3.0) <= 1e-9 && map == 1.0;
  return {pass, fmt("rmse %.6f, IoU %.12f, mAP %.17g", e, iou, map)};
}

// 11 -------------------------------------------------------------------------
Outcome lr_occlusion() {
  const StereoRig rig = preset_rig(320, 240);
  const double z_far = rig.focal_baseline() / 10.0;
  const double z_near = rig.focal_baseline() / 30.0;
  SceneSpec spec;
  spec.width = 320;
  spec.height = 240;
  spec.seed = 3;
  spec.primitives.push_back(PlanePrimitive{z_far, {}, texture_cell_for(z_far, rig)});
  PlanePrimitive near{z_near, {}, texture_cell_for(z_near, rig)};
  near.extent.x_min = 0.5 * z_near / rig.fx();  // starts half a pixel right of the image centre
  spec.primitives.push_back(near);
  const RenderedPair pair = render_pair(spec, rig);

  PipelineConfig c;
  c.range = {0, 39};
  const CostVolume raw = build_cost_volume(pair.left, pair.right, {c.window_radius, c.range}, c.cost);
  const DisparityMap left = select_wta(aggregate(raw, c));
  const DisparityMap right = select_wta(aggregate(right_reference_volume(raw), c));
  const DisparityMap checked = lr_consistency(left, right, 1.0);
  int occluded = 0;
  int flagged = 0;
  int exact = 0;
  int wrongly = 0;
  for (int y = 0; y < 240; ++y) {
    for (int x = 0; x < 320; ++x) {
      if (pair.occlusion_left(x, y)) {
        ++occluded;
        flagged += checked.valid(x, y) ? 0 : 1;
      } else if (left.valid(x, y) && std::abs(left(x, y) - pair.gt_left(x, y)) < 0.5) {
        ++exact;
        wrongly += checked.valid(x, y) ? 0 : 1;
      }
    }
  }
  const double f = static_cast<double>(flagged) / occluded;
  const double w = static_cast<double>(wrongly) / exact;
  return {f >= 0.90 && w <= 0.02, fmt("%d occluded, %.4f flagged; %d exact, %.4f wrongly flagged", occluded, f, exact, w)};
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "branchdepth_acceptance";
  fs::create_directories(work);
  BranchRun run_15;

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"geometry round trip", geometry_round_trip},
      {"brute-force cost/WTA equivalence", brute_force_equivalence},
      {"constant-shift recovery", constant_shift},
      {"sub-pixel gain", subpixel_gain},
      {"scanline optimality", scanline_optimality},
      {"WLS monotonicity and dense agreement", wls_monotone},
      {"MAD hand case", mad_hand_case},
      {"end-to-end branch distance", [&] { return end_to_end(work, run_15); }},
      {"outlier robustness", [&] { return outlier_robustness(work, run_15); }},
      {"metrics", metrics},
      {"left-right occlusion check", lr_occlusion},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
