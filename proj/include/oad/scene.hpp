#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "oad/geometry.hpp"
#include "oad/types.hpp"

namespace oad {

// Fronto-parallel rectangle facing the rig (constant z).
struct Obstacle {
  Vec3 center;
  double width = 0.0;
  double height = 0.0;
};

/// Synthetic road scene: a ground plane, a background plane and a handful of
/// box fronts, all with exactly known depth. Surfaces are deliberately simple
/// so rendered disparities can be checked by hand.
struct Scene {
  std::vector<Obstacle> obstacles;
  double ground_height = 1.65;     // y of the ground plane (y points down)
  double background_depth = 60.0;  // z of the backdrop plane
  std::uint64_t seed = 0;
};

struct SceneParams {
  std::pair<int, int> obstacle_count{3, 5};
  std::pair<double, double> depth_range{6.0, 45.0};
  std::pair<double, double> width_range{0.8, 2.6};
  std::pair<double, double> height_range{0.5, 2.2};
  double ground_height = 1.65;
  double background_depth = 60.0;
  // Obstacle centers are drawn within +-lateral_spread of the image-width
  // footprint at their depth, so they usually stay in view.
  double lateral_spread = 0.5;
};

struct Ray {
  Vec3 origin;
  Vec3 dir;  // need not be normalized
};

struct RayHit {
  Vec3 point;
  double range = 0.0;  // parameter along dir
};

Scene generate_scene(const SceneParams& params, std::uint64_t seed);

// Nearest surface along the ray. Obstacles win ties by lowest index and beat
// the ground/background planes on exact ties.
std::optional<RayHit> intersect_scene(const Scene& scene, const Ray& ray);

// Depth of the nearest surface seen through each pixel center of `reference`,
// converted to disparity at the |baseline difference| of the pair. Fully
// valid. Values are clamped to d_max.
DisparityMap render_truth_disparity(const Scene& scene, const CameraModel& reference,
                                    const CameraModel& partner, double d_max = 192.0);

}  // namespace oad
