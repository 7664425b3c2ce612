#pragma once

#include <optional>
#include <vector>

#include "branchdepth/cost_volume.hpp"
#include "branchdepth/image.hpp"

namespace branchdepth {

/// Per-pixel argmin of the cost column; ties go to the smaller disparity.
/// Pixels whose column is entirely invalid come out invalid.
DisparityMap select_wta(const CostVolume& cv);

/// Keeps d_left(x, y) iff |d_left(x, y) - d_right(x - round(d_left(x, y)), y)| <= tau.
/// d_right is referenced to the right image with the same positive sign.
DisparityMap lr_consistency(const DisparityMap& d_left, const DisparityMap& d_right, double tau);

/// Parabola fit through C(d-1), C(d), C(d+1) for integer disparities strictly
/// inside the range. Non-convex or flat fits pass through; the correction is
/// clamped to half a pixel.
DisparityMap subpixel_refine(const DisparityMap& d, const CostVolume& cv);

/// Median over the valid pixels of the (2r+1)^2 window. With an even number of
/// valid neighbours the lower middle value is taken, so integer labels stay
/// integer.
DisparityMap median_filter(const DisparityMap& d, int radius);

struct WlsParams {
  double lambda = 0.5;
  double sigma = 4.0;
  /// Per-pixel data weights w_(x,y); defaults to 1 on valid pixels.
  std::optional<Grid<double>> data_weights;
  int max_iterations = 200;
  /// Stop when the preconditioned residual falls below tolerance * |b|.
  double tolerance = 1e-6;
  /// Record the objective after every iteration.
  bool record_trace = false;
};

void validate(const WlsParams& params);

struct WlsResult {
  DisparityMap disparity;
  bool converged = false;
  int iterations = 0;
  std::vector<double> objective_trace;
};

/// Minimises sum_p w_p (d'_p - d_p)^2 + lambda * sum_{p~q} w_pq (d'_p - d'_q)^2
/// over valid pixels, with w_pq = exp(-(I_p - I_q)^2 / (2 sigma^2)) on 4-neighbour
/// pairs of the guide image. Invalid input pixels stay invalid and do not
/// couple their neighbours.
WlsResult wls_smooth(const DisparityMap& d, const GrayImage& guide, const WlsParams& params);

/// Value of the WLS objective for a candidate map against the initial one.
/// Data terms use the initial map's weights; smoothness pairs are taken over
/// pixels valid in the candidate.
double wls_objective(const DisparityMap& candidate, const DisparityMap& initial,
                     const GrayImage& guide, const WlsParams& params);

/// Guide-image affinity for one neighbour pair.
double wls_pair_weight(double intensity_a, double intensity_b, double sigma);

}  // namespace branchdepth
