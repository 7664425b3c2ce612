#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include <json.hpp>

#include "branchdepth/geometry.hpp"
#include "branchdepth/image.hpp"
#include "branchdepth/localize.hpp"

namespace branchdepth {

/// World-space bounds of a plane, metres. Unbounded by default.
struct PlaneExtent {
  double x_min = -std::numeric_limits<double>::infinity();
  double x_max = std::numeric_limits<double>::infinity();
  double y_min = -std::numeric_limits<double>::infinity();
  double y_max = std::numeric_limits<double>::infinity();
};

/// Fronto-parallel textured plane at depth z.
struct PlanePrimitive {
  double z = 1.0;
  PlaneExtent extent;
  double texture_cell = 0.005;  ///< lattice spacing of the value noise, metres
};

/// Finite open cylinder between two axis endpoints (the "branch").
struct CylinderPrimitive {
  WorldPoint a;
  WorldPoint b;
  double radius = 0.01;
  double texture_cell = 0.005;
};

using Primitive = std::variant<PlanePrimitive, CylinderPrimitive>;

struct SceneSpec {
  int width = 640;
  int height = 480;
  std::uint64_t seed = 1;
  /// Peak deviation of the texture from mid-grey, intensity levels.
  double texture_amplitude = 70.0;
  std::vector<Primitive> primitives;

  /// Throws ValidationError for bad sizes or primitives at or behind the camera.
  void validate() const;
};

/// Rendered pair with exact ground truth for both views.
struct RenderedPair {
  GrayImage left;
  GrayImage right;
  DisparityMap gt_left;   ///< W / z of the front-most surface; invalid where nothing is hit
  DisparityMap gt_right;  ///< same, referenced to the right image
  Mask occlusion_left;    ///< left pixels whose surface point the right camera cannot see
  Mask occlusion_right;
  Grid<int> label_left;  ///< primitive index per pixel, -1 for empty
  Grid<int> label_right;
};

/// Ray-casts both cameras against the scene. Textures live on the surfaces,
/// so both views sample the same pattern; intensities are rounded to 8 bits.
RenderedPair render_pair(const SceneSpec& spec, const StereoRig& rig);

/// World size of `pixels` image pixels at the given depth.
double texture_cell_for(double depth, const StereoRig& rig, double pixels = 3.0);

/// Rig used by the presets: f = 700 px, principal point at the image centre,
/// 63 mm baseline.
StereoRig preset_rig(int width = 640, int height = 480);

/// Single unbounded plane whose ground-truth disparity is `disparity`.
SceneSpec plane_scene(double disparity, const StereoRig& rig, int width, int height,
                      std::uint64_t seed = 1);

struct BranchScene {
  SceneSpec spec;
  BranchPointSet points;  ///< top silhouette left to right, then bottom right to left
  double distance = 0.0;
};

/// Horizontal 10 mm radius cylinder whose nearest surface is at `distance`, in
/// front of a background plane one metre further back.
BranchScene branch_scene(double distance, const StereoRig& rig, int width = 640, int height = 480,
                         std::uint64_t seed = 1, int points_per_edge = 12);

nlohmann::json scene_to_json(const SceneSpec& spec);
SceneSpec scene_from_json(const nlohmann::json& j);

/// Deterministic value noise in [0, 1] (two octaves, smoothstep blended).
double value_noise(std::uint64_t seed, double u, double v);

}  // namespace branchdepth
