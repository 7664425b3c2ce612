#include "branchdepth/pipeline.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>

namespace branchdepth {

std::string_view to_string(AggregationKind kind) {
  switch (kind) {
    case AggregationKind::none: return "none";
    case AggregationKind::fixed: return "fixed";
    case AggregationKind::multi: return "multi";
    case AggregationKind::diffuse: return "diffuse";
    case AggregationKind::semiglobal: return "semiglobal";
  }
  return "none";
}

AggregationKind aggregation_kind_from_string(std::string_view name) {
  if (name == "none") return AggregationKind::none;
  if (name == "fixed") return AggregationKind::fixed;
  if (name == "multi") return AggregationKind::multi;
  if (name == "diffuse") return AggregationKind::diffuse;
  if (name == "semiglobal" || name == "sgm") return AggregationKind::semiglobal;
  throw ValidationError("unknown aggregation '" + std::string(name) + "'");
}

void PipelineConfig::validate() const {
  if (window_radius < 0) throw ValidationError("window radius must be non-negative");
  if (range.min < 0 || range.min >= range.max) {
    throw ValidationError("disparity range must satisfy 0 <= d_min < d_max");
  }
  branchdepth::validate(multi);
  branchdepth::validate(diffusion);
  branchdepth::validate(energy);
  if (!(refine.lr_tau >= 0.0)) throw ValidationError("LR tolerance must be non-negative");
  if (refine.median_radius < 1) throw ValidationError("median radius must be at least 1");
  branchdepth::validate(refine.wls_params);
  branchdepth::validate(localize);
}

namespace {

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                    std::string_view where) {
  if (!j.is_object()) throw ValidationError("config section '" + std::string(where) + "' must be an object");
  for (const auto& item : j.items()) {
    bool found = false;
    for (std::string_view k : known) found = found || item.key() == k;
    if (!found) {
      throw ValidationError("unknown config key '" + item.key() + "' in '" + std::string(where) + "'");
    }
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& value) {
  if (j.contains(key)) value = j.at(key).get<T>();
}

}  // namespace

nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json offsets = nlohmann::json::array();
  for (const WindowOffset& o : c.multi.offsets) offsets.push_back({o.dx, o.dy});
  const auto& w = c.refine.wls_params;
  return {
      {"cost", std::string(to_string(c.cost))},
      {"window_radius", c.window_radius},
      {"d_min", c.range.min},
      {"d_max", c.range.max},
      {"aggregation", std::string(to_string(c.aggregation))},
      {"multi", {{"radius", c.multi.radius}, {"offsets", offsets}}},
      {"diffusion",
       {{"iterations", c.diffusion.iterations},
        {"weights", c.diffusion.weights},
        {"kernel", c.diffusion.kernel == DiffusionKernel::four_neighbour ? 4 : 8}}},
      {"semiglobal",
       {{"lambda", c.energy.lambda}, {"p1", c.energy.p1}, {"p2", c.energy.p2}, {"paths", c.energy.paths}}},
      {"refine",
       {{"lr_check", c.refine.lr_check},
        {"lr_tau", c.refine.lr_tau},
        {"median", c.refine.median},
        {"median_radius", c.refine.median_radius},
        {"subpixel", c.refine.subpixel},
        {"wls", c.refine.wls},
        {"wls_lambda", w.lambda},
        {"wls_sigma", w.sigma},
        {"wls_max_iterations", w.max_iterations},
        {"wls_tolerance", w.tolerance}}},
      {"localize",
       {{"method", std::string(to_string(c.localize.method))},
        {"k", finite_or_null(c.localize.k)},
        {"m", c.localize.m},
        {"pattern_radius", c.localize.pattern_radius}}},
  };
}

PipelineConfig config_from_json(const nlohmann::json& j, const PipelineConfig& base) {
  PipelineConfig c = base;
  try {
    reject_unknown(j, {"cost", "window_radius", "d_min", "d_max", "aggregation", "multi", "diffusion",
                       "semiglobal", "refine", "localize"},
                   "config");
    if (j.contains("cost")) c.cost = cost_kind_from_string(j.at("cost").get<std::string>());
    read(j, "window_radius", c.window_radius);
    read(j, "d_min", c.range.min);
    read(j, "d_max", c.range.max);
    if (j.contains("aggregation")) {
      c.aggregation = aggregation_kind_from_string(j.at("aggregation").get<std::string>());
    }
    if (j.contains("multi")) {
      const auto& m = j.at("multi");
      reject_unknown(m, {"radius", "offsets"}, "multi");
      read(m, "radius", c.multi.radius);
      if (m.contains("offsets")) {
        c.multi.offsets.clear();
        for (const auto& o : m.at("offsets")) {
          if (!o.is_array() || o.size() != 2) throw ValidationError("window offsets must be [dx, dy]");
          c.multi.offsets.push_back({o[0].get<int>(), o[1].get<int>()});
        }
      }
    }
    if (j.contains("diffusion")) {
      const auto& d = j.at("diffusion");
      reject_unknown(d, {"iterations", "weights", "kernel"}, "diffusion");
      read(d, "iterations", c.diffusion.iterations);
      read(d, "weights", c.diffusion.weights);
      if (d.contains("kernel")) {
        const int k = d.at("kernel").get<int>();
        if (k != 4 && k != 8) throw ValidationError("diffusion kernel must be 4 or 8");
        c.diffusion.kernel = k == 4 ? DiffusionKernel::four_neighbour : DiffusionKernel::eight_neighbour;
      }
    }
    if (j.contains("semiglobal")) {
      const auto& s = j.at("semiglobal");
      reject_unknown(s, {"lambda", "p1", "p2", "paths"}, "semiglobal");
      read(s, "lambda", c.energy.lambda);
      read(s, "p1", c.energy.p1);
      read(s, "p2", c.energy.p2);
      read(s, "paths", c.energy.paths);
    }
    if (j.contains("refine")) {
      const auto& r = j.at("refine");
      reject_unknown(r, {"lr_check", "lr_tau", "median", "median_radius", "subpixel", "wls", "wls_lambda",
                         "wls_sigma", "wls_max_iterations", "wls_tolerance"},
                     "refine");
      read(r, "lr_check", c.refine.lr_check);
      read(r, "lr_tau", c.refine.lr_tau);
      read(r, "median", c.refine.median);
      read(r, "median_radius", c.refine.median_radius);
      read(r, "subpixel", c.refine.subpixel);
      read(r, "wls", c.refine.wls);
      read(r, "wls_lambda", c.refine.wls_params.lambda);
      read(r, "wls_sigma", c.refine.wls_params.sigma);
      read(r, "wls_max_iterations", c.refine.wls_params.max_iterations);
      read(r, "wls_tolerance", c.refine.wls_params.tolerance);
    }
    if (j.contains("localize")) {
      const auto& l = j.at("localize");
      reject_unknown(l, {"method", "k", "m", "pattern_radius"}, "localize");
      if (l.contains("method")) c.localize.method = localize_method_from_string(l.at("method").get<std::string>());
      if (l.contains("k")) {
        c.localize.k = l.at("k").is_null() ? std::numeric_limits<double>::infinity() : l.at("k").get<double>();
      }
      read(l, "m", c.localize.m);
      read(l, "pattern_radius", c.localize.pattern_radius);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

CostVolume aggregate(const CostVolume& raw, const PipelineConfig& config) {
  switch (config.aggregation) {
    case AggregationKind::none: return raw;
    case AggregationKind::fixed: return aggregate_fixed(raw, config.window_radius);
    case AggregationKind::multi: return aggregate_multi(raw, config.multi);
    case AggregationKind::diffuse: return aggregate_diffuse(raw, config.diffusion);
    case AggregationKind::semiglobal:
      return aggregate_semiglobal(aggregate_fixed(raw, config.window_radius), config.energy);
  }
  return raw;
}

DisparityOutput compute_disparity(const GrayImage& left, const GrayImage& right,
                                  const PipelineConfig& config) {
  config.validate();
  require_same_shape(left, right, "stereo pair");
  const MatchWindow window{config.window_radius, config.range};
  const CostVolume raw = build_cost_volume(left, right, window, config.cost);

  DisparityOutput out;
  DisparityMap current;
  CostVolume aggregated = aggregate(raw, config);
  out.wta_left = select_wta(aggregated);
  current = out.wta_left;

  if (config.refine.lr_check) {
    const CostVolume right_aggregated = aggregate(right_reference_volume(raw), config);
    out.wta_right = select_wta(right_aggregated);
    current = lr_consistency(current, out.wta_right, config.refine.lr_tau);
  }
  if (config.refine.median) current = median_filter(current, config.refine.median_radius);
  if (config.refine.subpixel) current = subpixel_refine(current, aggregated);
  if (config.refine.wls) {
    WlsResult wls = wls_smooth(current, left, config.refine.wls_params);
    out.wls_converged = wls.converged;
    out.wls_iterations = wls.iterations;
    current = std::move(wls.disparity);
  }
  out.disparity = std::move(current);
  return out;
}

}  // namespace branchdepth
