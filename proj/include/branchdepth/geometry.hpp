#pragma once

#include <json.hpp>

namespace branchdepth {

/// Maximum row difference accepted between the two halves of a PixelPair.
inline constexpr double kRectificationTolerance = 0.5;

/// Point in the left camera frame, metres.
struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Corresponding pixel positions in a rectified pair.
struct PixelPair {
  double u_l = 0.0;
  double v_l = 0.0;
  double u_r = 0.0;
  double v_r = 0.0;

  double disparity() const noexcept { return u_l - u_r; }
};

/// Rectified pinhole stereo rig. The right camera sits at +baseline along x.
class StereoRig {
 public:
  StereoRig(double fx, double fy, double ox, double oy, double baseline_m);

  double fx() const noexcept { return fx_; }
  double fy() const noexcept { return fy_; }
  double ox() const noexcept { return ox_; }
  double oy() const noexcept { return oy_; }
  double baseline() const noexcept { return baseline_; }

  /// W = b * f_x; depth z = W / d.
  double focal_baseline() const noexcept { return baseline_ * fx_; }

 private:
  double fx_;
  double fy_;
  double ox_;
  double oy_;
  double baseline_;
};

PixelPair project(const StereoRig& rig, const WorldPoint& p);

/// Inverse of project(). Throws NumericError when u_l - u_r <= 0 and
/// ValidationError when the rows differ by more than kRectificationTolerance.
WorldPoint triangulate(const StereoRig& rig, const PixelPair& pp);

/// Axial depth for a disparity; d must be positive.
double disparity_to_depth(const StereoRig& rig, double d);
double depth_to_disparity(const StereoRig& rig, double z);

// {"fx", "fy", "ox", "oy", "baseline_m"}; W is derived and never written.
StereoRig rig_from_json(const nlohmann::json& j);
nlohmann::json rig_to_json(const StereoRig& rig);

}  // namespace branchdepth
