#include "oad/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "oad/errors.hpp"
#include "oad/rng.hpp"

namespace oad {

PointCloud inject_lidar_spoof(const PointCloud& cloud, const LidarSpoofParams& params,
                              const Vec3& lidar_origin) {
  if (params.width <= 0.0 || params.height <= 0.0)
    throw DomainError("spoof block needs positive width and height");
  if (!(params.distance_min > 0.0 && params.distance_min <= params.distance_max))
    throw DomainError("spoof distance range must satisfy 0 < min <= max");
  if (params.point_density < 0.0) throw DomainError("point_density must be >= 0");

  Rng rng(derive_seed(params.seed, 0x5b00fu));
  const double z_block = lidar_origin.z + rng.uniform(params.distance_min, params.distance_max);
  const double cx = lidar_origin.x + params.lateral_offset;
  const double cy = lidar_origin.y;
  const double half_w = params.width / 2.0;
  const double half_h = params.height / 2.0;

  PointCloud out;
  out.points.reserve(cloud.size());

  // The spoofed pulses arrive first for every beam crossing the block, so
  // genuine returns behind it vanish.
  for (const auto& p : cloud.points) {
    const double dz = p.z - lidar_origin.z;
    const double plane_dz = z_block - lidar_origin.z;
    bool occluded = false;
    if (dz > 0.0 && plane_dz > 0.0 && dz > plane_dz) {
      const double s = plane_dz / dz;
      const double x = lidar_origin.x + s * (p.x - lidar_origin.x);
      const double y = lidar_origin.y + s * (p.y - lidar_origin.y);
      occluded = std::abs(x - cx) <= half_w && std::abs(y - cy) <= half_h;
    }
    if (!occluded) out.points.push_back(p);
  }

  const int nx = std::max(
      0, static_cast<int>(std::llround(params.width * std::sqrt(params.point_density))));
  const int ny = std::max(
      0, static_cast<int>(std::llround(params.height * std::sqrt(params.point_density))));
  if (params.point_density > 0.0 && nx > 0 && ny > 0) {
    const double step_x = params.width / nx;
    const double step_y = params.height / ny;
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const double x = cx - half_w + (ix + rng.uniform01()) * step_x;
        const double y = cy - half_h + (iy + rng.uniform01()) * step_y;
        out.points.push_back(LidarPoint{static_cast<float>(x), static_cast<float>(y),
                                        static_cast<float>(z_block), 1.0f});
      }
    }
  }
  return out;
}

FaculaMask make_facula(int image_w, int image_h, double radius,
                       std::optional<PixelCoord> center, std::uint64_t seed) {
  if (radius <= 0.0) throw DomainError("facula radius must be positive");
  if (image_w <= 0 || image_h <= 0) throw DomainError("facula needs a positive image size");

  PixelCoord c;
  if (center) {
    c = *center;
    if (c.u < 0.0 || c.u > image_w || c.v < 0.0 || c.v > image_h)
      throw DomainError("facula center must lie inside the image");
  } else {
    Rng rng(derive_seed(seed, 0xfac01au));
    c.u = rng.uniform(0.0, static_cast<double>(image_w));
    c.v = rng.uniform(0.0, static_cast<double>(image_h));
  }

  FaculaMask mask;
  mask.center_u = c.u;
  mask.center_v = c.v;
  mask.radius = radius;
  mask.width = image_w;
  mask.height = image_h;
  mask.intensity_sigma = radius / 2.0;
  mask.covered.assign(static_cast<std::size_t>(image_w) * image_h, 0);

  const double r2 = radius * radius;
  const int y0 = std::max(0, static_cast<int>(std::floor(c.v - radius - 1.0)));
  const int y1 = std::min(image_h - 1, static_cast<int>(std::ceil(c.v + radius + 1.0)));
  for (int y = y0; y <= y1; ++y) {
    const double dy = (y + 0.5) - c.v;
    const double rem = r2 - dy * dy;
    if (rem < 0.0) continue;
    const double half = std::sqrt(rem);
    const int x0 = std::max(0, static_cast<int>(std::ceil(c.u - half - 0.5)));
    const int x1 = std::min(image_w - 1, static_cast<int>(std::floor(c.u + half - 0.5)));
    uint8_t* row = mask.covered.data() + static_cast<std::size_t>(y) * image_w;
    for (int x = x0; x <= x1; ++x) row[x] = 1;
  }
  return mask;
}

}  // namespace oad
