#include "oad/sensors.hpp"

#include <algorithm>
#include <cmath>

#include "oad/errors.hpp"
#include "oad/rng.hpp"

namespace oad {

namespace {
constexpr double kDegToRad = 0.017453292519943295;
}

PointCloud sample_lidar(const Scene& scene, const LidarConfig& lidar, const Vec3& origin,
                        std::uint64_t seed) {
  PointCloud cloud;
  const int steps = lidar.azimuth_steps();
  if (steps <= 0 || lidar.channels <= 0) return cloud;
  cloud.points.reserve(static_cast<std::size_t>(steps) * lidar.channels / 2);

  const std::uint64_t jitter_seed = derive_seed(seed, 0x11da7u);
  for (int ch = 0; ch < lidar.channels; ++ch) {
    const double el_frac =
        lidar.channels == 1 ? 0.5 : static_cast<double>(ch) / (lidar.channels - 1);
    const double elevation =
        (lidar.elevation_min_deg +
         el_frac * (lidar.elevation_max_deg - lidar.elevation_min_deg)) *
        kDegToRad;
    for (int step = 0; step < steps; ++step) {
      const double azimuth =
          (lidar.azimuth_min_deg + step * lidar.azimuth_step_deg) * kDegToRad;
      // +y is down, so positive elevation tilts the beam up.
      const Vec3 dir{std::sin(azimuth) * std::cos(elevation), -std::sin(elevation),
                     std::cos(azimuth) * std::cos(elevation)};
      const auto hit = intersect_scene(scene, Ray{origin, dir});
      if (!hit) continue;

      double range = hit->range;  // dir is unit length
      if (lidar.range_jitter_sigma > 0.0) {
        const std::uint64_t beam =
            static_cast<std::uint64_t>(ch) * 1000003u + static_cast<std::uint64_t>(step);
        Rng beam_rng(derive_seed(jitter_seed, beam));
        range += beam_rng.normal(lidar.range_jitter_sigma);
      }
      const double intensity = 1.0 / (1.0 + 0.02 * range);
      cloud.points.push_back(LidarPoint{
          static_cast<float>(origin.x + range * dir.x),
          static_cast<float>(origin.y + range * dir.y),
          static_cast<float>(origin.z + range * dir.z), static_cast<float>(intensity)});
    }
  }
  return cloud;
}

DisparityMap lidar_to_disparity(const PointCloud& cloud, const CameraModel& reference,
                                double stereo_baseline, double near_clip) {
  if (stereo_baseline <= 0.0)
    throw DomainError("lidar_to_disparity requires a positive stereo baseline");
  DisparityMap map = DisparityMap::all_invalid(reference.image_width, reference.image_height);
  map.source_pair = {0, reference.id};
  map.baseline = stereo_baseline;

  // Nearest point wins when several land on one pixel.
  std::vector<float> depth(map.pixel_count(), 0.0f);
  for (const auto& p : cloud.points) {
    const auto proj =
        project_point(Vec3{p.x, p.y, p.z}, reference, near_clip);
    if (!proj) continue;
    const int x = static_cast<int>(proj->pixel.u);
    const int y = static_cast<int>(proj->pixel.v);
    const auto i = map.index(x, y);
    if (map.valid[i] && depth[i] <= proj->depth) continue;
    depth[i] = static_cast<float>(proj->depth);
    map.values[i] = static_cast<float>(
        depth_to_disparity(proj->depth, reference.focal_length, stereo_baseline));
    map.valid[i] = 1;
  }
  return map;
}

DisparityMap estimate_stereo_disparity(const DisparityMap& truth,
                                       const EstimatorNoiseModel& noise,
                                       std::span<const FaculaMask> faculae,
                                       std::uint64_t seed) {
  for (const auto v : truth.valid) {
    if (!v) throw ContractError("stereo estimation needs a fully valid truth map");
  }
  if (noise.gaussian_sigma < 0.0 || noise.outlier_fraction < 0.0 ||
      noise.outlier_fraction > 1.0 || noise.outlier_range < 0.0 || noise.d_max <= 0.0)
    throw DomainError("invalid estimator noise model");
  for (const auto& m : faculae) {
    if (m.width != truth.width || m.height != truth.height)
      throw ContractError("facula mask size does not match the disparity map");
  }

  DisparityMap out = truth;
  const std::uint64_t noise_seed = derive_seed(seed, 0xe57u);
  const std::uint64_t facula_seed = derive_seed(seed, 0xfadeu);
  const double d_max = noise.d_max;

  // Draws are keyed per pixel index, never sequential, so the unmasked
  // pixels of two runs agree whenever their seeds do, regardless of masks.
  const std::size_t n = out.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    bool blinded = false;
    for (const auto& m : faculae) {
      if (m.covered[i]) {
        blinded = true;
        break;
      }
    }
    double d;
    if (blinded) {
      d = d_max * u64_to_unit(splitmix64(facula_seed ^ (i * 0x9e3779b97f4a7c15ull)));
    } else {
      const double t = out.values[i];
      std::uint64_t h = splitmix64(noise_seed ^ (i * 0x9e3779b97f4a7c15ull));
      d = t + noise.gaussian_sigma * normal_from_bits(h);
      if (noise.outlier_fraction > 0.0) {
        h = splitmix64(h ^ 0xd1b54a32d192ed03ull);
        if (u64_to_unit(h) <= noise.outlier_fraction) {
          h = splitmix64(h ^ 0x8bb84b93962eacc9ull);
          d = t + (2.0 * u64_to_unit(h) - 1.0) * noise.outlier_range;
        }
      }
    }
    out.values[i] = static_cast<float>(std::clamp(d, 0.0, d_max));
  }
  return out;
}

}  // namespace oad
