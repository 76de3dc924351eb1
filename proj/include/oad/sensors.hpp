#pragma once

#include <cstdint>
#include <span>

#include "oad/attacks.hpp"
#include "oad/geometry.hpp"
#include "oad/scene.hpp"
#include "oad/types.hpp"

namespace oad {

/// Parametric stand-in for a learned stereo matcher: per-pixel Gaussian
/// noise on the true disparity, a sprinkling of gross outliers, and total
/// corruption (uniform over [0, d_max]) wherever a facula blinds either
/// camera of the pair.
struct EstimatorNoiseModel {
  double gaussian_sigma = 0.7;    // pixels
  double outlier_fraction = 0.01;
  double outlier_range = 24.0;    // pixels, half-width around the truth
  double d_max = 192.0;
};

// One return per beam hitting a surface, in rig-frame coordinates, with
// range jitter keyed per beam. Beams sweep azimuth_min..max in fixed steps
// across `channels` evenly spaced elevation rings.
PointCloud sample_lidar(const Scene& scene, const LidarConfig& lidar, const Vec3& origin,
                        std::uint64_t seed);

// Projects cloud points onto the reference image; a pixel is valid iff at
// least one point lands on it, and carries the nearest point's disparity at
// the given stereo baseline.
DisparityMap lidar_to_disparity(const PointCloud& cloud, const CameraModel& reference,
                                double stereo_baseline, double near_clip = kNearClip);

// Applies the noise model to a fully valid truth map. Throws ContractError
// when the truth has invalid pixels. Deterministic given seed; draws are
// keyed per pixel so results are stable under concurrent evaluation and
// facula masks only affect the pixels they cover.
DisparityMap estimate_stereo_disparity(const DisparityMap& truth,
                                       const EstimatorNoiseModel& noise,
                                       std::span<const FaculaMask> faculae,
                                       std::uint64_t seed);

}  // namespace oad
