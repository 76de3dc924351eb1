#pragma once

#include <string>

#include "oad/types.hpp"

namespace oad {

// Point cloud files are raw little-endian float32 quadruples (x, y, z,
// intensity). Disparity grids use a "Pf" text header (magic, "width height",
// scale) followed by row-major float32 values, NaN marking invalid pixels.

void save_point_cloud(const PointCloud& cloud, const std::string& path);
PointCloud load_point_cloud(const std::string& path);

void save_disparity_map(const DisparityMap& map, const std::string& path);
DisparityMap load_disparity_map(const std::string& path);

}  // namespace oad
