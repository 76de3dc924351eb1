#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace oad {

// Rig frame: +z forward, +x rightward, +y downward.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

struct LidarPoint {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  float intensity = 0.0f;
};

struct PointCloud {
  std::vector<LidarPoint> points;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

/// Per-pixel disparity grid referenced to one camera's image. Invalid pixels
/// carry NaN in `values` and false in `valid`; `baseline` is the stereo
/// baseline the disparities are scaled to.
struct DisparityMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;   // row-major
  std::vector<uint8_t> valid;  // row-major
  std::array<int, 2> source_pair{-1, -1};
  double baseline = 0.0;

  static DisparityMap all_invalid(int w, int h) {
    DisparityMap m;
    m.width = w;
    m.height = h;
    m.values.assign(static_cast<std::size_t>(w) * h,
                    std::numeric_limits<float>::quiet_NaN());
    m.valid.assign(static_cast<std::size_t>(w) * h, 0);
    return m;
  }

  static DisparityMap constant(int w, int h, float value) {
    DisparityMap m;
    m.width = w;
    m.height = h;
    m.values.assign(static_cast<std::size_t>(w) * h, value);
    m.valid.assign(static_cast<std::size_t>(w) * h, 1);
    return m;
  }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }

  float at(int x, int y) const { return values[index(x, y)]; }
  bool is_valid(int x, int y) const { return valid[index(x, y)] != 0; }

  void set(int x, int y, float d) {
    const auto i = index(x, y);
    values[i] = d;
    valid[i] = 1;
  }

  void invalidate(int x, int y) {
    const auto i = index(x, y);
    values[i] = std::numeric_limits<float>::quiet_NaN();
    valid[i] = 0;
  }

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }

  long valid_count() const {
    long n = 0;
    for (const auto v : valid) n += v != 0;
    return n;
  }
};

}  // namespace oad
