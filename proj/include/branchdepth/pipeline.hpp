#pragma once

#include <string_view>

#include <json.hpp>

#include "branchdepth/aggregation.hpp"
#include "branchdepth/cost_volume.hpp"
#include "branchdepth/image.hpp"
#include "branchdepth/localize.hpp"
#include "branchdepth/refine.hpp"

namespace branchdepth {

enum class AggregationKind { none, fixed, multi, diffuse, semiglobal };

std::string_view to_string(AggregationKind kind);
AggregationKind aggregation_kind_from_string(std::string_view name);

/// Refinement stages run in the order WTA -> LRC -> median -> sub-pixel -> WLS.
struct RefineConfig {
  bool lr_check = true;
  double lr_tau = 1.0;
  bool median = true;
  int median_radius = 1;
  bool subpixel = true;
  bool wls = true;
  WlsParams wls_params;
};

struct PipelineConfig {
  CostKind cost = CostKind::ad;
  /// NCC window radius and box radius of fixed (and pre-semi-global) aggregation.
  int window_radius = 4;
  DisparityRange range{0, 63};
  AggregationKind aggregation = AggregationKind::semiglobal;
  MultiWindowParams multi;
  DiffusionParams diffusion;
  EnergyParams energy{1.0, 200.0, 1600.0, 8};
  RefineConfig refine;
  LocalizeParams localize;

  void validate() const;
};

nlohmann::json config_to_json(const PipelineConfig& config);

/// Keys missing from `j` keep their value from `base`. Unknown keys are
/// rejected so typos do not silently fall back to defaults.
PipelineConfig config_from_json(const nlohmann::json& j, const PipelineConfig& base = {});

/// The configured aggregation applied to a raw volume. Semi-global runs on
/// box-aggregated costs (radius window_radius).
CostVolume aggregate(const CostVolume& raw, const PipelineConfig& config);

struct DisparityOutput {
  DisparityMap disparity;  ///< after every enabled refinement stage
  DisparityMap wta_left;
  DisparityMap wta_right;  ///< empty unless the LR check ran
  bool wls_converged = true;
  int wls_iterations = 0;
};

DisparityOutput compute_disparity(const GrayImage& left, const GrayImage& right,
                                  const PipelineConfig& config);

}  // namespace branchdepth
