#include "oad/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oad/errors.hpp"
#include "oad/rng.hpp"

namespace oad {

namespace {

void check_range(double lo, double hi, const char* what) {
  if (!(lo <= hi)) throw ConfigError(std::string(what) + " range is inverted");
}

}  // namespace

Scene generate_scene(const SceneParams& params, std::uint64_t seed) {
  if (params.obstacle_count.first < 0 ||
      params.obstacle_count.first > params.obstacle_count.second)
    throw ConfigError("obstacle count range is empty or inverted");
  check_range(params.depth_range.first, params.depth_range.second, "depth");
  check_range(params.width_range.first, params.width_range.second, "width");
  check_range(params.height_range.first, params.height_range.second, "height");
  if (params.depth_range.first <= kNearClip)
    throw ConfigError("obstacle depths must exceed the near clip");
  if (params.width_range.first <= 0.0 || params.height_range.first <= 0.0)
    throw ConfigError("obstacle sizes must be positive");
  if (params.background_depth <= params.depth_range.second)
    throw ConfigError("background_depth must exceed every obstacle depth");

  Scene scene;
  scene.ground_height = params.ground_height;
  scene.background_depth = params.background_depth;
  scene.seed = seed;

  Rng rng(derive_seed(seed, 0x5ce11eu));
  const int count = static_cast<int>(
      rng.uniform_int(params.obstacle_count.first, params.obstacle_count.second));
  scene.obstacles.reserve(count);
  for (int i = 0; i < count; ++i) {
    Obstacle o;
    const double z = rng.uniform(params.depth_range.first, params.depth_range.second);
    o.width = rng.uniform(params.width_range.first, params.width_range.second);
    o.height = rng.uniform(params.height_range.first, params.height_range.second);
    const double spread = params.lateral_spread * z;
    const double x = rng.uniform(-spread, spread);
    // Boxes stand on the ground plane (+y is down).
    o.center = Vec3{x, params.ground_height - o.height / 2.0, z};
    scene.obstacles.push_back(o);
  }
  return scene;
}

std::optional<RayHit> intersect_scene(const Scene& scene, const Ray& ray) {
  constexpr double kMinRange = 1e-9;
  double best = std::numeric_limits<double>::infinity();

  for (const auto& o : scene.obstacles) {
    if (ray.dir.z == 0.0) continue;
    const double t = (o.center.z - ray.origin.z) / ray.dir.z;
    if (t <= kMinRange || t >= best) continue;
    const double x = ray.origin.x + t * ray.dir.x;
    const double y = ray.origin.y + t * ray.dir.y;
    if (std::abs(x - o.center.x) <= o.width / 2.0 &&
        std::abs(y - o.center.y) <= o.height / 2.0) {
      best = t;
    }
  }
  if (ray.dir.y != 0.0) {
    const double t = (scene.ground_height - ray.origin.y) / ray.dir.y;
    if (t > kMinRange && t < best) best = t;
  }
  if (ray.dir.z != 0.0) {
    const double t = (scene.background_depth - ray.origin.z) / ray.dir.z;
    if (t > kMinRange && t < best) best = t;
  }

  if (!std::isfinite(best)) return std::nullopt;
  return RayHit{Vec3{ray.origin.x + best * ray.dir.x, ray.origin.y + best * ray.dir.y,
                     ray.origin.z + best * ray.dir.z},
                best};
}

DisparityMap render_truth_disparity(const Scene& scene, const CameraModel& reference,
                                    const CameraModel& partner, double d_max) {
  const int w = reference.image_width;
  const int h = reference.image_height;
  const double f = reference.focal_length;
  const double cam_x = reference.center_x();

  std::vector<double> depth(static_cast<std::size_t>(w) * h,
                            std::numeric_limits<double>::infinity());

  // Fronto-parallel rectangles project to axis-aligned pixel rectangles, so
  // filling their pixel-center footprint is exactly the per-pixel ray cast.
  for (const auto& o : scene.obstacles) {
    const double z = o.center.z;
    if (z <= kNearClip) continue;
    const double u_lo = reference.principal_point.u + f * (o.center.x - o.width / 2.0 - cam_x) / z;
    const double u_hi = reference.principal_point.u + f * (o.center.x + o.width / 2.0 - cam_x) / z;
    const double v_lo = reference.principal_point.v + f * (o.center.y - o.height / 2.0) / z;
    const double v_hi = reference.principal_point.v + f * (o.center.y + o.height / 2.0) / z;
    const int x0 = std::max(0, static_cast<int>(std::ceil(u_lo - 0.5)));
    const int x1 = std::min(w - 1, static_cast<int>(std::floor(u_hi - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(v_lo - 0.5)));
    const int y1 = std::min(h - 1, static_cast<int>(std::floor(v_hi - 0.5)));
    for (int y = y0; y <= y1; ++y) {
      double* row = depth.data() + static_cast<std::size_t>(y) * w;
      for (int x = x0; x <= x1; ++x) {
        if (z < row[x]) row[x] = z;
      }
    }
  }

  for (int y = 0; y < h; ++y) {
    const double ky = (y + 0.5 - reference.principal_point.v) / f;
    double* row = depth.data() + static_cast<std::size_t>(y) * w;
    if (ky > 0.0) {
      const double zg = scene.ground_height / ky;
      if (zg > kNearClip) {
        for (int x = 0; x < w; ++x) {
          if (zg < row[x]) row[x] = zg;
        }
      }
    }
    for (int x = 0; x < w; ++x) {
      if (scene.background_depth < row[x]) row[x] = scene.background_depth;
    }
  }

  DisparityMap map = DisparityMap::all_invalid(w, h);
  map.source_pair = {partner.id, reference.id};
  const double b = std::abs(reference.baseline_position - partner.baseline_position);
  map.baseline = b;
  for (std::size_t i = 0; i < depth.size(); ++i) {
    double d = 0.0;
    if (b > 0.0 && std::isfinite(depth[i])) d = std::min(f * b / depth[i], d_max);
    map.values[i] = static_cast<float>(d);
    map.valid[i] = 1;
  }
  return map;
}

}  // namespace oad
