#pragma once

#include <vector>

#include "branchdepth/cost_volume.hpp"
#include "branchdepth/image.hpp"

namespace branchdepth {

struct WindowOffset {
  int dx = 0;
  int dy = 0;
  friend bool operator==(const WindowOffset&, const WindowOffset&) = default;
};

/// Window centres T_k relative to the pixel being aggregated.
struct MultiWindowParams {
  std::vector<WindowOffset> offsets{{0, 0}};
  int radius = 1;
};

enum class DiffusionKernel { four_neighbour, eight_neighbour };

/// Round n replaces every cell by the normalised neighbourhood average of the
/// previous round, scaled by weights[n].
struct DiffusionParams {
  int iterations = 1;
  std::vector<double> weights{1.0};
  DiffusionKernel kernel = DiffusionKernel::four_neighbour;
};

/// Scanline energy E = E_data + lambda * E_smooth with the two-level penalty
/// rho(0) = 0, rho(+-1) = p1, rho(other) = p2.
struct EnergyParams {
  double lambda = 1.0;
  double p1 = 8.0;
  double p2 = 32.0;
  int paths = 8;  ///< 1, 2, 4 or 8 scanline directions
};

void validate(const MultiWindowParams& params);
void validate(const DiffusionParams& params);
void validate(const EnergyParams& params);

/// Window sum over (2r+1)^2 cells at the same disparity. Invalid or
/// out-of-image cells are left out and the sum is rescaled to the full window
/// area. A cell that is invalid in the input stays invalid.
CostVolume aggregate_fixed(const CostVolume& cv, int radius);

/// Sum of window sums centred at each offset. Windows with no valid cell are
/// dropped and the total is rescaled to N windows.
CostVolume aggregate_multi(const CostVolume& cv, const MultiWindowParams& params);

/// Iterated normalised neighbourhood averaging. Off-image and invalid
/// neighbours reflect onto the centre cell, which keeps the operator
/// symmetric: plane sums are conserved when every weight is 1.
CostVolume aggregate_diffuse(const CostVolume& cv, const DiffusionParams& params);

/// Semi-global aggregation: sum over directions r of
///   L_r(p,d) = C(p,d) + min(L_r(p-r,d), L_r(p-r,d+-1) + P1, min_k L_r(p-r,k) + P2)
///              - min_k L_r(p-r,k)
/// with P1 = lambda*p1 and P2 = lambda*p2. Invalid cells stay invalid.
CostVolume aggregate_semiglobal(const CostVolume& cv, const EnergyParams& params);

/// E_data + lambda * E_smooth of a labelling over right and down neighbour
/// pairs. Labels are rounded to the nearest integer disparity; invalid pixels
/// are skipped.
double energy_of(const DisparityMap& disp, const CostVolume& cv, const EnergyParams& params);

/// rho(delta) of the smoothness term.
double smoothness_penalty(double delta, const EnergyParams& params);

}  // namespace branchdepth
