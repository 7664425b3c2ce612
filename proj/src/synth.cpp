#include "branchdepth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "branchdepth/error.hpp"

namespace branchdepth {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice(std::uint64_t seed, std::int64_t i, std::int64_t j) {
  const std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i) ^
                                                       splitmix64(static_cast<std::uint64_t>(j))));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double single_octave(std::uint64_t seed, double u, double v) {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const auto i = static_cast<std::int64_t>(fu);
  const auto j = static_cast<std::int64_t>(fv);
  const double su = smoothstep(u - fu);
  const double sv = smoothstep(v - fv);
  const double a = lattice(seed, i, j);
  const double b = lattice(seed, i + 1, j);
  const double c = lattice(seed, i, j + 1);
  const double d = lattice(seed, i + 1, j + 1);
  return (a + (b - a) * su) * (1.0 - sv) + (c + (d - c) * su) * sv;
}

struct Vec3 {
  double x, y, z;
};
Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
Vec3 to_vec(const WorldPoint& p) { return {p.x, p.y, p.z}; }

struct Hit {
  double t = std::numeric_limits<double>::infinity();  // equals depth z since dir.z == 1
  int label = -1;
  double tex_u = 0.0;
  double tex_v = 0.0;
};

void intersect(const PlanePrimitive& plane, Vec3 origin, Vec3 dir, int label, Hit& best) {
  const double t = (plane.z - origin.z) / dir.z;
  if (!(t > 0.0) || t >= best.t) return;
  const Vec3 p = origin + t * dir;
  const PlaneExtent& e = plane.extent;
  if (p.x < e.x_min || p.x > e.x_max || p.y < e.y_min || p.y > e.y_max) return;
  best = {t, label, p.x / plane.texture_cell, p.y / plane.texture_cell};
}

void intersect(const CylinderPrimitive& cyl, Vec3 origin, Vec3 dir, int label, Hit& best) {
  const Vec3 a = to_vec(cyl.a);
  const Vec3 axis_full = to_vec(cyl.b) - a;
  const double length = std::sqrt(dot(axis_full, axis_full));
  const Vec3 axis = (1.0 / length) * axis_full;
  const Vec3 w = origin - a;
  const Vec3 dir_p = dir - dot(dir, axis) * axis;
  const Vec3 w_p = w - dot(w, axis) * axis;
  const double qa = dot(dir_p, dir_p);
  const double qb = dot(dir_p, w_p);
  const double qc = dot(w_p, w_p) - cyl.radius * cyl.radius;
  if (qa <= 0.0) return;
  const double disc = qb * qb - qa * qc;
  if (disc < 0.0) return;
  const double root = std::sqrt(disc);
  for (double t : {(-qb - root) / qa, (-qb + root) / qa}) {
    if (!(t > 0.0) || t >= best.t) continue;
    const Vec3 p = origin + t * dir;
    const double s = dot(p - a, axis);
    if (s < 0.0 || s > length) continue;
    // Angle around the axis in a frame fixed by the axis direction.
    Vec3 ref = std::abs(axis.z) < 0.9 ? Vec3{0.0, 0.0, 1.0} : Vec3{1.0, 0.0, 0.0};
    const Vec3 e1_raw = ref - dot(ref, axis) * axis;
    const Vec3 e1 = (1.0 / std::sqrt(dot(e1_raw, e1_raw))) * e1_raw;
    const Vec3 e2 = cross(axis, e1);
    const Vec3 radial = (p - a) - s * axis;
    const double angle = std::atan2(dot(radial, e2), dot(radial, e1));
    best = {t, label, s / cyl.texture_cell, angle * cyl.radius / cyl.texture_cell};
    return;
  }
}

Hit cast(const SceneSpec& spec, Vec3 origin, Vec3 dir) {
  Hit best;
  for (std::size_t i = 0; i < spec.primitives.size(); ++i) {
    std::visit([&](const auto& prim) { intersect(prim, origin, dir, static_cast<int>(i), best); },
               spec.primitives[i]);
  }
  return best;
}

Vec3 ray_direction(const StereoRig& rig, double u, double v) {
  return {(u - rig.ox()) / rig.fx(), (v - rig.oy()) / rig.fy(), 1.0};
}

double shade(const SceneSpec& spec, const Hit& hit) {
  const std::uint64_t prim_seed = splitmix64(spec.seed + 0x51ed27ULL * static_cast<std::uint64_t>(hit.label + 1));
  const double n = value_noise(prim_seed, hit.tex_u, hit.tex_v);
  const double value = 128.0 + spec.texture_amplitude * (2.0 * n - 1.0);
  return std::clamp(std::round(value), 0.0, 255.0);
}

struct ViewRender {
  GrayImage image;
  DisparityMap gt;
  Grid<int> label;
  Grid<double> depth;
};

ViewRender render_view(const SceneSpec& spec, const StereoRig& rig, Vec3 origin) {
  ViewRender view{GrayImage(spec.width, spec.height, 0.0), DisparityMap(spec.width, spec.height),
                  Grid<int>(spec.width, spec.height, -1),
                  Grid<double>(spec.width, spec.height, std::numeric_limits<double>::infinity())};
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const Hit hit = cast(spec, origin, ray_direction(rig, x, y));
      if (hit.label < 0) continue;
      view.image(x, y) = shade(spec, hit);
      view.gt(x, y) = rig.focal_baseline() / hit.t;
      view.label(x, y) = hit.label;
      view.depth(x, y) = hit.t;
    }
  }
  return view;
}

// A surface point seen at depth z is occluded in the other view when its
// reprojection leaves the image or the other camera's first hit is nearer.
Mask occlusion_mask(const SceneSpec& spec, const StereoRig& rig, const ViewRender& view,
                    Vec3 other_origin, double direction) {
  Mask mask(spec.width, spec.height, 0);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const double z = view.depth(x, y);
      if (!std::isfinite(z)) continue;
      const double u_other = x + direction * rig.focal_baseline() / z;
      if (u_other < -0.5 || u_other >= spec.width - 0.5) {
        mask(x, y) = 1;
        continue;
      }
      const Hit other = cast(spec, other_origin, ray_direction(rig, u_other, y));
      if (other.t < z * (1.0 - 1e-9)) mask(x, y) = 1;
    }
  }
  return mask;
}

}  // namespace

double value_noise(std::uint64_t seed, double u, double v) {
  const double coarse = single_octave(seed, u, v);
  const double fine = single_octave(splitmix64(seed + 1), 2.0 * u + 17.31, 2.0 * v + 5.17);
  return 0.65 * coarse + 0.35 * fine;
}

void SceneSpec::validate() const {
  if (width <= 0 || height <= 0) throw ValidationError("scene image size must be positive");
  if (!(texture_amplitude >= 0.0) || texture_amplitude > 127.0) {
    throw ValidationError("texture amplitude must lie in [0, 127]");
  }
  for (const Primitive& prim : primitives) {
    if (const auto* plane = std::get_if<PlanePrimitive>(&prim)) {
      if (!(plane->z > 0.0)) throw ValidationError("plane lies at or behind the camera");
      if (!(plane->texture_cell > 0.0)) throw ValidationError("texture cell must be positive");
    } else {
      const auto& cyl = std::get<CylinderPrimitive>(prim);
      if (!(cyl.radius > 0.0)) throw ValidationError("cylinder radius must be positive");
      if (!(cyl.texture_cell > 0.0)) throw ValidationError("texture cell must be positive");
      if (!(std::min(cyl.a.z, cyl.b.z) - cyl.radius > 0.0)) {
        throw ValidationError("cylinder reaches at or behind the camera");
      }
      const Vec3 axis = to_vec(cyl.b) - to_vec(cyl.a);
      if (!(dot(axis, axis) > 0.0)) throw ValidationError("cylinder axis has zero length");
    }
  }
}

RenderedPair render_pair(const SceneSpec& spec, const StereoRig& rig) {
  spec.validate();
  const Vec3 left_origin{0.0, 0.0, 0.0};
  const Vec3 right_origin{rig.baseline(), 0.0, 0.0};
  ViewRender left = render_view(spec, rig, left_origin);
  ViewRender right = render_view(spec, rig, right_origin);
  RenderedPair out;
  out.occlusion_left = occlusion_mask(spec, rig, left, right_origin, -1.0);
  out.occlusion_right = occlusion_mask(spec, rig, right, left_origin, +1.0);
  out.left = std::move(left.image);
  out.right = std::move(right.image);
  out.gt_left = std::move(left.gt);
  out.gt_right = std::move(right.gt);
  out.label_left = std::move(left.label);
  out.label_right = std::move(right.label);
  return out;
}

double texture_cell_for(double depth, const StereoRig& rig, double pixels) {
  return pixels * depth / rig.fx();
}

StereoRig preset_rig(int width, int height) {
  return StereoRig(700.0, 700.0, width / 2.0, height / 2.0, 0.063);
}

SceneSpec plane_scene(double disparity, const StereoRig& rig, int width, int height,
                      std::uint64_t seed) {
  if (!(disparity > 0.0)) throw ValidationError("plane disparity must be positive");
  SceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.seed = seed;
  const double z = rig.focal_baseline() / disparity;
  spec.primitives.push_back(PlanePrimitive{z, {}, texture_cell_for(z, rig)});
  return spec;
}

BranchScene branch_scene(double distance, const StereoRig& rig, int width, int height,
                         std::uint64_t seed, int points_per_edge) {
  if (!(distance > 0.0)) throw ValidationError("branch distance must be positive");
  if (points_per_edge < 2) throw ValidationError("need at least two points per branch edge");
  constexpr double kRadius = 0.01;
  constexpr double kHalfLength = 0.2;
  constexpr double kPointInset = 0.03;

  BranchScene scene;
  scene.distance = distance;
  scene.spec.width = width;
  scene.spec.height = height;
  scene.spec.seed = seed;
  const double background = distance + 1.0;
  scene.spec.primitives.push_back(
      PlanePrimitive{background, {}, texture_cell_for(background, rig)});
  // The nearest point of the branch (its centre row) sits at the requested distance.
  const double axis = distance + kRadius;
  scene.spec.primitives.push_back(CylinderPrimitive{{-kHalfLength, 0.0, axis},
                                                    {kHalfLength, 0.0, axis},
                                                    kRadius,
                                                    texture_cell_for(distance, rig)});
  scene.spec.validate();

  // Silhouette rows come from the tangent rays to the circular cross-section.
  const double alpha = std::asin(kRadius / axis);
  const double tangent_len = std::sqrt(axis * axis - kRadius * kRadius);
  const double tz = tangent_len * std::cos(alpha);
  const double ty = tangent_len * std::sin(alpha);
  const double v_top = rig.oy() - rig.fy() * ty / tz;
  const double v_bottom = rig.oy() + rig.fy() * ty / tz;
  const double x_lo = -kHalfLength + kPointInset;
  const double x_hi = kHalfLength - kPointInset;
  std::vector<double> us;
  for (int i = 0; i < points_per_edge; ++i) {
    const double xw = x_lo + (x_hi - x_lo) * i / (points_per_edge - 1);
    us.push_back(rig.ox() + rig.fx() * xw / tz);
  }
  for (double u : us) scene.points.points.push_back({u, v_top});
  for (auto it = us.rbegin(); it != us.rend(); ++it) scene.points.points.push_back({*it, v_bottom});
  scene.points.validate(width, height);
  return scene;
}

namespace {

nlohmann::json bound_to_json(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double bound_from_json(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<double>();
}

WorldPoint point_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw ValidationError("3-D points must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

nlohmann::json scene_to_json(const SceneSpec& spec) {
  nlohmann::json prims = nlohmann::json::array();
  for (const Primitive& prim : spec.primitives) {
    if (const auto* plane = std::get_if<PlanePrimitive>(&prim)) {
      prims.push_back({{"type", "plane"},
                       {"z", plane->z},
                       {"texture_cell", plane->texture_cell},
                       {"extent",
                        {{"x_min", bound_to_json(plane->extent.x_min)},
                         {"x_max", bound_to_json(plane->extent.x_max)},
                         {"y_min", bound_to_json(plane->extent.y_min)},
                         {"y_max", bound_to_json(plane->extent.y_max)}}}});
    } else {
      const auto& cyl = std::get<CylinderPrimitive>(prim);
      prims.push_back({{"type", "cylinder"},
                       {"a", {cyl.a.x, cyl.a.y, cyl.a.z}},
                       {"b", {cyl.b.x, cyl.b.y, cyl.b.z}},
                       {"radius", cyl.radius},
                       {"texture_cell", cyl.texture_cell}});
    }
  }
  return {{"width", spec.width},
          {"height", spec.height},
          {"seed", spec.seed},
          {"texture_amplitude", spec.texture_amplitude},
          {"primitives", prims}};
}

SceneSpec scene_from_json(const nlohmann::json& j) {
  SceneSpec spec;
  try {
    spec.width = j.value("width", spec.width);
    spec.height = j.value("height", spec.height);
    spec.seed = j.value("seed", spec.seed);
    spec.texture_amplitude = j.value("texture_amplitude", spec.texture_amplitude);
    for (const auto& p : j.at("primitives")) {
      const std::string type = p.at("type").get<std::string>();
      if (type == "plane") {
        PlanePrimitive plane;
        plane.z = p.at("z").get<double>();
        plane.texture_cell = p.value("texture_cell", plane.texture_cell);
        if (p.contains("extent")) {
          const auto& e = p.at("extent");
          plane.extent.x_min = bound_from_json(e, "x_min", plane.extent.x_min);
          plane.extent.x_max = bound_from_json(e, "x_max", plane.extent.x_max);
          plane.extent.y_min = bound_from_json(e, "y_min", plane.extent.y_min);
          plane.extent.y_max = bound_from_json(e, "y_max", plane.extent.y_max);
        }
        spec.primitives.emplace_back(plane);
      } else if (type == "cylinder") {
        CylinderPrimitive cyl;
        cyl.a = point_from_json(p.at("a"));
        cyl.b = point_from_json(p.at("b"));
        cyl.radius = p.value("radius", cyl.radius);
        cyl.texture_cell = p.value("texture_cell", cyl.texture_cell);
        spec.primitives.emplace_back(cyl);
      } else {
        throw ValidationError("unknown primitive type '" + type + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed scene: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace branchdepth
