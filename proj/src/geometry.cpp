#include "branchdepth/geometry.hpp"

#include <cmath>
#include <string>

#include "branchdepth/error.hpp"

namespace branchdepth {

StereoRig::StereoRig(double fx, double fy, double ox, double oy, double baseline_m)
    : fx_(fx), fy_(fy), ox_(ox), oy_(oy), baseline_(baseline_m) {
  if (!(fx > 0.0) || !(fy > 0.0) || !(baseline_m > 0.0)) {
    throw ValidationError("stereo rig requires fx > 0, fy > 0 and baseline > 0");
  }
  if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(ox) ||
      !std::isfinite(oy) || !std::isfinite(baseline_m)) {
    throw ValidationError("stereo rig parameters must be finite");
  }
}

PixelPair project(const StereoRig& rig, const WorldPoint& p) {
  if (!(p.z > 0.0)) {
    throw NumericError("cannot project a point with non-positive depth z=" +
                       std::to_string(p.z));
  }
  PixelPair pp;
  pp.u_l = rig.fx() * p.x / p.z + rig.ox();
  pp.v_l = rig.fy() * p.y / p.z + rig.oy();
  pp.u_r = rig.fx() * (p.x - rig.baseline()) / p.z + rig.ox();
  pp.v_r = pp.v_l;
  return pp;
}

WorldPoint triangulate(const StereoRig& rig, const PixelPair& pp) {
  if (std::abs(pp.v_l - pp.v_r) > kRectificationTolerance) {
    throw ValidationError("pixel pair rows differ by more than the rectification tolerance");
  }
  const double d = pp.disparity();
  if (!(d > 0.0)) {
    throw NumericError("point at or beyond infinity: disparity " + std::to_string(d));
  }
  const double b = rig.baseline();
  WorldPoint p;
  p.x = b * (pp.u_l - rig.ox()) / d;
  p.y = b * rig.fx() * (pp.v_l - rig.oy()) / (rig.fy() * d);
  p.z = rig.focal_baseline() / d;
  return p;
}

double disparity_to_depth(const StereoRig& rig, double d) {
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw NumericError("invalid disparity " + std::to_string(d) + " for depth conversion");
  }
  return rig.focal_baseline() / d;
}

double depth_to_disparity(const StereoRig& rig, double z) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw NumericError("invalid depth " + std::to_string(z) + " for disparity conversion");
  }
  return rig.focal_baseline() / z;
}

StereoRig rig_from_json(const nlohmann::json& j) {
  try {
    return StereoRig(j.at("fx").get<double>(), j.at("fy").get<double>(),
                     j.at("ox").get<double>(), j.at("oy").get<double>(),
                     j.at("baseline_m").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed rig: ") + e.what());
  }
}

nlohmann::json rig_to_json(const StereoRig& rig) {
  return {{"fx", rig.fx()},
          {"fy", rig.fy()},
          {"ox", rig.ox()},
          {"oy", rig.oy()},
          {"baseline_m", rig.baseline()}};
}

}  // namespace branchdepth
