#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "oad/types.hpp"

namespace oad {

/// Bogus point block injected into a LiDAR cloud: a fronto-parallel rectangle
/// of spoofed returns at a random distance, occluding every genuine return
/// whose beam crosses it.
struct LidarSpoofParams {
  double width = 2.5;    // meters
  double height = 1.5;   // meters
  double distance_min = 6.0;
  double distance_max = 10.0;
  double lateral_offset = 0.0;   // meters, relative to the LiDAR
  double point_density = 500.0;  // points per square meter
  std::uint64_t seed = 0;
};

/// Saturated disk blinding part of a camera image. Only the mask matters
/// downstream; the intensity profile's sigma is kept as metadata.
struct FaculaMask {
  double center_u = 0.0;
  double center_v = 0.0;
  double radius = 0.0;
  int width = 0;
  int height = 0;
  std::vector<uint8_t> covered;  // row-major
  double intensity_sigma = 0.0;  // radius / 2

  bool covers(int x, int y) const {
    return covered[static_cast<std::size_t>(y) * width + x] != 0;
  }

  long covered_count() const {
    long n = 0;
    for (const auto c : covered) n += c != 0;
    return n;
  }

  double coverage_fraction() const {
    return static_cast<double>(covered_count()) /
           (static_cast<double>(width) * height);
  }
};

// A facula tagged with the camera sensor index it contaminates.
struct TaggedFacula {
  int sensor = -1;
  FaculaMask mask;
};

PointCloud inject_lidar_spoof(const PointCloud& cloud, const LidarSpoofParams& params,
                              const Vec3& lidar_origin);

// Disk mask over pixel centers. A missing center is drawn uniformly over the
// frame (the center always lies inside the image; the disk may clip).
FaculaMask make_facula(int image_w, int image_h, double radius,
                       std::optional<PixelCoord> center, std::uint64_t seed);

}  // namespace oad
