#pragma once

#include <optional>
#include <vector>

#include "oad/types.hpp"

namespace oad {

// Points closer than this never project (disparity would blow up at z -> 0).
constexpr double kNearClip = 0.5;

/// Rectified pinhole camera. All cameras of one rig share focal length,
/// image size and principal point; they differ only in `baseline_position`,
/// the signed lateral offset along the rig axis, increasing right to left.
struct CameraModel {
  int id = 0;
  double focal_length = 0.0;      // pixels
  double baseline_position = 0.0; // meters
  int image_width = 0;
  int image_height = 0;
  PixelCoord principal_point{0.0, 0.0};

  // Rig-frame x coordinate of the optical center (+x is rightward, the
  // baseline axis increases leftward).
  double center_x() const { return -baseline_position; }
};

struct LidarConfig {
  int channels = 64;
  double elevation_min_deg = -24.8;
  double elevation_max_deg = 2.0;
  double azimuth_min_deg = -40.0;
  double azimuth_max_deg = 40.0;
  double azimuth_step_deg = 0.125;
  double range_jitter_sigma = 0.01;  // meters, along the beam

  int azimuth_steps() const;
};

/// One LiDAR plus n cameras ordered right to left; cameras[i] is S_{i+1} when
/// the LiDAR is present, S_i otherwise.
struct RigConfig {
  bool lidar_present = true;
  std::vector<CameraModel> cameras;
  Vec3 lidar_pose{-0.27, -0.30, 0.0};
  LidarConfig lidar;

  int camera_count() const { return static_cast<int>(cameras.size()); }
};

struct Projection {
  PixelCoord pixel;
  double depth = 0.0;
};

// z = f * b / d. Throws DomainError on nonpositive input.
double disparity_to_depth(double d, double f, double b);

// d = f * b / z. Throws DomainError on nonpositive input.
double depth_to_disparity(double z, double f, double b);

// Projects a rig-frame point onto a camera. Returns nullopt when the point
// is behind the near clip or lands outside the image bounds.
std::optional<Projection> project_point(const Vec3& p, const CameraModel& cam,
                                        double near_clip = kNearClip);

// Multiplies every valid disparity by b_to/b_from; the validity mask is
// untouched. Throws DomainError on a nonpositive baseline.
DisparityMap rescale_disparity(const DisparityMap& map, double b_from, double b_to);

// Validates rig invariants (positive geometry, shared intrinsics, strictly
// increasing baseline positions). Throws ConfigError.
void validate_rig(const RigConfig& rig);

}  // namespace oad
