#include "oad/geometry.hpp"

#include <cmath>

#include "oad/errors.hpp"

namespace oad {

int LidarConfig::azimuth_steps() const {
  if (azimuth_step_deg <= 0.0 || azimuth_max_deg < azimuth_min_deg) return 0;
  return static_cast<int>(
             std::floor((azimuth_max_deg - azimuth_min_deg) / azimuth_step_deg + 1e-9)) +
         1;
}

double disparity_to_depth(double d, double f, double b) {
  if (d <= 0.0 || f <= 0.0 || b <= 0.0)
    throw DomainError("disparity_to_depth requires positive d, f, b");
  return f * b / d;
}

double depth_to_disparity(double z, double f, double b) {
  if (z <= 0.0 || f <= 0.0 || b <= 0.0)
    throw DomainError("depth_to_disparity requires positive z, f, b");
  return f * b / z;
}

std::optional<Projection> project_point(const Vec3& p, const CameraModel& cam,
                                        double near_clip) {
  if (p.z <= near_clip) return std::nullopt;
  const double u = cam.principal_point.u + cam.focal_length * (p.x - cam.center_x()) / p.z;
  const double v = cam.principal_point.v + cam.focal_length * p.y / p.z;
  if (u < 0.0 || u >= cam.image_width || v < 0.0 || v >= cam.image_height)
    return std::nullopt;
  return Projection{{u, v}, p.z};
}

DisparityMap rescale_disparity(const DisparityMap& map, double b_from, double b_to) {
  if (b_from <= 0.0 || b_to <= 0.0)
    throw DomainError("rescale_disparity requires positive baselines");
  DisparityMap out = map;
  const double ratio = b_to / b_from;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (out.valid[i]) out.values[i] = static_cast<float>(out.values[i] * ratio);
  }
  out.baseline = b_to;
  return out;
}

void validate_rig(const RigConfig& rig) {
  if (rig.cameras.size() < 2) throw ConfigError("rig needs at least two cameras");
  const auto& first = rig.cameras.front();
  if (first.focal_length <= 0.0) throw ConfigError("focal_length must be positive");
  if (first.image_width <= 0 || first.image_height <= 0)
    throw ConfigError("image dimensions must be positive");
  for (std::size_t i = 0; i < rig.cameras.size(); ++i) {
    const auto& cam = rig.cameras[i];
    if (cam.focal_length != first.focal_length ||
        cam.image_width != first.image_width ||
        cam.image_height != first.image_height ||
        cam.principal_point.u != first.principal_point.u ||
        cam.principal_point.v != first.principal_point.v)
      throw ConfigError("all cameras of a rig must share intrinsics");
    if (i > 0 && !(cam.baseline_position > rig.cameras[i - 1].baseline_position))
      throw ConfigError("camera baseline positions must be strictly increasing");
  }
}

}  // namespace oad
