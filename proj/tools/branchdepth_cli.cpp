// branchdepth: synthetic scenes, disparity, branch distance and metrics.
//
// Exit codes: 0 success, 1 I/O, 2 validation, 3 numeric / no valid data.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "branchdepth/error.hpp"
#include "branchdepth/evaluation.hpp"
#include "branchdepth/geometry.hpp"
#include "branchdepth/io.hpp"
#include "branchdepth/localize.hpp"
#include "branchdepth/pipeline.hpp"
#include "branchdepth/synth.hpp"

namespace fs = std::filesystem;
using namespace branchdepth;
using nlohmann::json;

namespace {

void emit(const json& result, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << result.dump(2) << "\n";
  } else {
    write_json(out_path, result);
  }
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string config;
  std::string preset;
  std::optional<double> distance;
  std::optional<double> disparity;
  std::optional<std::uint64_t> seed;
  std::optional<int> width;
  std::optional<int> height;
  std::string rig;
  std::string out;
};

int run_synth(const SynthArgs& args) {
  json cfg = args.config.empty() ? json::object() : read_json(args.config);
  if (!args.preset.empty()) cfg["preset"] = args.preset;
  if (args.distance) cfg["distance_m"] = *args.distance;
  if (args.disparity) cfg["disparity"] = *args.disparity;
  if (args.seed) cfg["seed"] = *args.seed;
  if (args.width) cfg["width"] = *args.width;
  if (args.height) cfg["height"] = *args.height;

  const int width = cfg.value("width", 640);
  const int height = cfg.value("height", 480);
  const std::uint64_t seed = cfg.value("seed", std::uint64_t{1});
  if (width <= 0 || height <= 0) throw ValidationError("image size must be positive");
  StereoRig rig = preset_rig(width, height);
  if (!args.rig.empty()) {
    rig = rig_from_json(read_json(args.rig));
  } else if (cfg.contains("rig")) {
    rig = rig_from_json(cfg.at("rig"));
  }

  SceneSpec spec;
  std::optional<BranchPointSet> points;
  const std::string preset = cfg.value("preset", std::string(cfg.contains("primitives") ? "" : "branch"));
  if (preset == "branch") {
    const double distance = cfg.value("distance_m", 1.5);
    if (!(distance > 0.0)) throw ValidationError("branch distance must be positive");
    BranchScene scene = branch_scene(distance, rig, width, height, seed);
    spec = std::move(scene.spec);
    points = std::move(scene.points);
  } else if (preset == "plane") {
    spec = plane_scene(cfg.value("disparity", 25.0), rig, width, height, seed);
  } else if (preset.empty()) {
    spec = scene_from_json(cfg);
  } else {
    throw ValidationError("unknown scene preset '" + preset + "'");
  }
  if (cfg.contains("texture_amplitude")) spec.texture_amplitude = cfg.at("texture_amplitude").get<double>();

  const RenderedPair pair = render_pair(spec, rig);
  const fs::path dir(args.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");

  write_pgm(dir / "left.pgm", pair.left);
  write_pgm(dir / "right.pgm", pair.right);
  write_pfm(dir / "gt.pfm", pair.gt_left);
  write_pgm(dir / "occlusion.pgm", pair.occlusion_left);
  json files = {"left.pgm", "right.pgm", "gt.pfm", "occlusion.pgm"};
  if (points) {
    write_json(dir / "points.json", points_to_json(*points));
    files.push_back("points.json");
  }
  json echo = scene_to_json(spec);
  if (!preset.empty()) echo["preset"] = preset;
  echo["rig"] = rig_to_json(rig);
  write_json(dir / "scene.json", echo);
  write_json(dir / "rig.json", rig_to_json(rig));
  files.push_back("scene.json");
  files.push_back("rig.json");
  std::cout << json{{"out_dir", dir.string()}, {"files", files}}.dump(2) << "\n";
  return 0;
}

// ------------------------------------------------------------ disparity

struct DisparityArgs {
  std::string left;
  std::string right;
  std::string config;
  std::string out;
  std::string preview;
  std::string result;
  std::optional<std::string> cost;
  std::optional<int> radius;
  std::optional<int> d_min;
  std::optional<int> d_max;
  std::optional<std::string> aggregation;
  std::optional<double> p1;
  std::optional<double> p2;
  std::optional<int> paths;
  std::optional<double> wls_lambda;
  std::optional<double> wls_sigma;
  bool no_lr = false;
  bool no_median = false;
  bool no_subpixel = false;
  bool no_wls = false;
};

PipelineConfig load_config(const std::string& path) {
  return path.empty() ? PipelineConfig{} : config_from_json(read_json(path));
}

int run_disparity(const DisparityArgs& args) {
  PipelineConfig config = load_config(args.config);
  if (args.cost) config.cost = cost_kind_from_string(*args.cost);
  if (args.radius) config.window_radius = *args.radius;
  if (args.d_min) config.range.min = *args.d_min;
  if (args.d_max) config.range.max = *args.d_max;
  if (args.aggregation) config.aggregation = aggregation_kind_from_string(*args.aggregation);
  if (args.p1) config.energy.p1 = *args.p1;
  if (args.p2) config.energy.p2 = *args.p2;
  if (args.paths) config.energy.paths = *args.paths;
  if (args.wls_lambda) config.refine.wls_params.lambda = *args.wls_lambda;
  if (args.wls_sigma) config.refine.wls_params.sigma = *args.wls_sigma;
  if (args.no_lr) config.refine.lr_check = false;
  if (args.no_median) config.refine.median = false;
  if (args.no_subpixel) config.refine.subpixel = false;
  if (args.no_wls) config.refine.wls = false;
  config.validate();

  const GrayImage left = read_image(args.left);
  const GrayImage right = read_image(args.right);
  const DisparityOutput result = compute_disparity(left, right, config);
  write_pfm(args.out, result.disparity);
  if (!args.preview.empty()) write_pgm(args.preview, disparity_preview(result.disparity));
  if (!result.wls_converged) std::cerr << "warning: WLS did not converge within the iteration cap\n";
  emit({{"output", args.out},
        {"width", result.disparity.width()},
        {"height", result.disparity.height()},
        {"valid_pixels", result.disparity.valid_count()},
        {"wls_converged", result.wls_converged},
        {"wls_iterations", result.wls_iterations},
        {"config", config_to_json(config)}},
       args.result);
  return 0;
}

// ------------------------------------------------------------- localize

struct LocalizeArgs {
  std::string disparity;
  std::string points;
  std::string rig;
  std::string config;
  std::string out;
  std::optional<std::string> method;
  std::optional<double> k;
  std::optional<int> m;
  std::optional<double> radius;
};

int run_localize(const LocalizeArgs& args) {
  LocalizeParams params = load_config(args.config).localize;
  if (args.method) params.method = localize_method_from_string(*args.method);
  if (args.k) params.k = *args.k;
  if (args.m) params.m = *args.m;
  if (args.radius) params.pattern_radius = *args.radius;
  validate(params);

  const DisparityMap disp = read_pfm(args.disparity);
  const BranchPointSet points = points_from_json(read_json(args.points));
  const StereoRig rig = rig_from_json(read_json(args.rig));
  try {
    const DistanceEstimate est = estimate_distance(disp, rig, points, params);
    emit(estimate_to_json(est, params), args.out);
  } catch (const NumericError& e) {
    emit({{"error", e.what()}, {"exit_code", e.exit_code()}}, args.out);
    throw;
  }
  return 0;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string metric = "all";
  double tau = 1.0;
  int bins = 20;
  std::string rig;
  std::string points;
  std::string hist_csv;
  std::string out;
};

int run_eval(const EvalArgs& args) {
  const DisparityMap pred = read_pfm(args.pred);
  const bool want_rmse = args.metric == "rmse" || args.metric == "all";
  const bool want_bad = args.metric == "bad" || args.metric == "all";
  const bool want_hist = args.metric == "hist" || (args.metric == "all" && !args.rig.empty());
  if (!want_rmse && !want_bad && !want_hist) {
    throw ValidationError("unknown metric '" + args.metric + "' (rmse, bad, hist, all)");
  }
  json report = {{"pred", args.pred}, {"metric", args.metric}};
  if (want_rmse || want_bad) {
    if (args.gt.empty()) throw ValidationError("--gt is required for rmse and bad-pixel metrics");
    const DisparityMap gt = read_pfm(args.gt);
    require_same_shape(pred, gt, "eval");
    report["gt"] = args.gt;
    if (want_rmse) {
      const RmseResult r = rmse(pred, gt);
      report["rmse"] = {{"value", r.rmse}, {"used", r.used}, {"excluded", r.excluded}};
    }
    if (want_bad) {
      const BadPixelResult b = bad_pixel_rate(pred, gt, args.tau);
      report["bad_pixel"] = {{"tau", args.tau}, {"rate", b.rate}, {"bad", b.bad}, {"used", b.used}};
    }
  }
  if (want_hist) {
    if (args.rig.empty()) throw ValidationError("--rig is required for the depth histogram");
    const StereoRig rig = rig_from_json(read_json(args.rig));
    std::vector<double> depths;
    auto add = [&](int x, int y) {
      const double d = pred(x, y);
      if (is_valid_disparity(d) && d > 0.0) depths.push_back(disparity_to_depth(rig, d));
    };
    if (!args.points.empty()) {
      const BranchPointSet points = points_from_json(read_json(args.points));
      for (const auto& px : polygon_interior(points.points, pred.width(), pred.height())) add(px[0], px[1]);
    } else {
      for (int y = 0; y < pred.height(); ++y)
        for (int x = 0; x < pred.width(); ++x) add(x, y);
    }
    const DepthHistogram hist = depth_histogram(depths, args.bins);
    report["histogram"] = histogram_to_json(hist);
    if (!args.hist_csv.empty()) write_text(args.hist_csv, histogram_csv(hist));
  }
  emit(report, args.out);
  return 0;
}

// ------------------------------------------------------------ eval-mask

struct EvalMaskArgs {
  std::string pred;
  std::string gt;
  bool trapezoid = false;
  std::string out;
};

std::vector<Instance> read_instances(const fs::path& path) {
  const json j = read_json(path);
  std::vector<Instance> out;
  try {
    for (const auto& item : j.at("instances")) {
      fs::path mask_path = item.at("mask").get<std::string>();
      if (mask_path.is_relative()) mask_path = path.parent_path() / mask_path;
      out.push_back({read_mask(mask_path), item.value("score", 1.0)});
    }
  } catch (const json::exception& e) {
    throw ValidationError("malformed instance list '" + path.string() + "': " + e.what());
  }
  return out;
}

int run_eval_mask(const EvalMaskArgs& args) {
  const bool json_inputs = fs::path(args.pred).extension() == ".json";
  if (json_inputs != (fs::path(args.gt).extension() == ".json")) {
    throw ValidationError("--pred and --gt must both be masks or both be instance lists");
  }
  if (!json_inputs) {
    const double iou = mask_iou(read_mask(args.pred), read_mask(args.gt));
    emit({{"metric", "iou"}, {"iou", iou}}, args.out);
    return 0;
  }
  const auto preds = read_instances(args.pred);
  const auto gts = read_instances(args.gt);
  MapEvalParams params;
  params.interpolated = !args.trapezoid;
  const MapResult result = map_50_95(preds, gts, params);
  if (result.empty_ground_truth) std::cerr << "warning: empty ground truth, mAP reported as 0\n";
  emit({{"metric", "map_50_95"},
        {"map", result.map},
        {"ap", result.ap},
        {"interpolation", params.interpolated ? "101-point" : "trapezoid"},
        {"predictions", preds.size()},
        {"ground_truth", gts.size()},
        {"empty_ground_truth", result.empty_ground_truth}},
       args.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stereo branch-distance toolkit"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic stereo pair with ground truth");
  synth_cmd->add_option("--config", synth.config, "Scene JSON (preset or explicit primitives)");
  synth_cmd->add_option("--preset", synth.preset, "branch or plane");
  synth_cmd->add_option("--distance", synth.distance, "Branch distance, metres");
  synth_cmd->add_option("--disparity", synth.disparity, "Plane disparity, pixels");
  synth_cmd->add_option("--seed", synth.seed, "Texture seed");
  synth_cmd->add_option("--width", synth.width);
  synth_cmd->add_option("--height", synth.height);
  synth_cmd->add_option("--rig", synth.rig, "Rig JSON");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  DisparityArgs disp;
  auto* disp_cmd = app.add_subcommand("disparity", "Compute a refined disparity map");
  disp_cmd->add_option("--left", disp.left)->required();
  disp_cmd->add_option("--right", disp.right)->required();
  disp_cmd->add_option("--config", disp.config, "Pipeline config JSON");
  disp_cmd->add_option("--out", disp.out, "Output PFM")->required();
  disp_cmd->add_option("--preview", disp.preview, "8-bit preview PGM");
  disp_cmd->add_option("--result", disp.result, "Write the run report here instead of stdout");
  disp_cmd->add_option("--cost", disp.cost, "ad, sd or ncc");
  disp_cmd->add_option("--radius", disp.radius, "Window radius");
  disp_cmd->add_option("--d-min", disp.d_min);
  disp_cmd->add_option("--d-max", disp.d_max);
  disp_cmd->add_option("--aggregation", disp.aggregation, "none, fixed, multi, diffuse, semiglobal");
  disp_cmd->add_option("--p1", disp.p1);
  disp_cmd->add_option("--p2", disp.p2);
  disp_cmd->add_option("--paths", disp.paths);
  disp_cmd->add_option("--wls-lambda", disp.wls_lambda);
  disp_cmd->add_option("--wls-sigma", disp.wls_sigma);
  disp_cmd->add_flag("--no-lr", disp.no_lr);
  disp_cmd->add_flag("--no-median", disp.no_median);
  disp_cmd->add_flag("--no-subpixel", disp.no_subpixel);
  disp_cmd->add_flag("--no-wls", disp.no_wls);

  LocalizeArgs loc;
  auto* loc_cmd = app.add_subcommand("localize", "Estimate camera-to-branch distance");
  loc_cmd->add_option("--disparity", loc.disparity)->required();
  loc_cmd->add_option("--points", loc.points)->required();
  loc_cmd->add_option("--rig", loc.rig)->required();
  loc_cmd->add_option("--config", loc.config, "Pipeline config JSON (localize section)");
  loc_cmd->add_option("--method", loc.method, "centroid or polygon");
  loc_cmd->add_option("--k", loc.k, "MAD rejection multiplier (inf disables)");
  loc_cmd->add_option("--m", loc.m, "Samples per centroid");
  loc_cmd->add_option("--pattern-radius", loc.radius, "Ring radius, pixels");
  loc_cmd->add_option("--out", loc.out, "result.json path (stdout if omitted)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Disparity metrics and depth histograms");
  eval_cmd->add_option("--pred", ev.pred)->required();
  eval_cmd->add_option("--gt", ev.gt);
  eval_cmd->add_option("--metric", ev.metric, "rmse, bad, hist or all");
  eval_cmd->add_option("--tau", ev.tau, "Bad-pixel threshold");
  eval_cmd->add_option("--bins", ev.bins, "Histogram bins");
  eval_cmd->add_option("--rig", ev.rig, "Rig JSON, needed for histograms");
  eval_cmd->add_option("--points", ev.points, "Restrict the histogram to this outline");
  eval_cmd->add_option("--hist-csv", ev.hist_csv, "Histogram CSV output");
  eval_cmd->add_option("--out", ev.out);

  EvalMaskArgs em;
  auto* mask_cmd = app.add_subcommand("eval-mask", "Mask IoU or mAP50-95");
  mask_cmd->add_option("--pred", em.pred, "PGM mask or instance-list JSON")->required();
  mask_cmd->add_option("--gt", em.gt, "PGM mask or instance-list JSON")->required();
  mask_cmd->add_flag("--trapezoid", em.trapezoid, "Raw trapezoidal AP instead of 101-point");
  mask_cmd->add_option("--out", em.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::validation);
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*disp_cmd) return run_disparity(disp);
    if (*loc_cmd) return run_localize(loc);
    if (*eval_cmd) return run_eval(ev);
    if (*mask_cmd) return run_eval_mask(em);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::io);
  }
  return 0;
}
