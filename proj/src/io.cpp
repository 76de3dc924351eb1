#include "oad/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "oad/errors.hpp"

namespace oad {

namespace {

static_assert(sizeof(LidarPoint) == 16, "point cloud records are four packed floats");

std::vector<char> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  return buf;
}

}  // namespace

void save_point_cloud(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  if (!cloud.points.empty()) {
    out.write(reinterpret_cast<const char*>(cloud.points.data()),
              static_cast<std::streamsize>(cloud.points.size() * sizeof(LidarPoint)));
  }
  if (!out) throw IoError("short write to " + path);
}

PointCloud load_point_cloud(const std::string& path) {
  const auto buf = read_all(path);
  if (buf.size() % sizeof(LidarPoint) != 0)
    throw ParseError("point cloud payload is not a whole number of records",
                     buf.size() - buf.size() % sizeof(LidarPoint));
  PointCloud cloud;
  cloud.points.resize(buf.size() / sizeof(LidarPoint));
  if (!buf.empty()) std::memcpy(cloud.points.data(), buf.data(), buf.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !std::isfinite(p.intensity))
      throw ParseError("non-finite point field", i * sizeof(LidarPoint));
  }
  return cloud;
}

void save_disparity_map(const DisparityMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "Pf\n" << map.width << " " << map.height << "\n-1.0\n";
  std::vector<float> row(map.values.begin(), map.values.end());
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (!map.valid[i]) row[i] = std::numeric_limits<float>::quiet_NaN();
  }
  if (!row.empty()) {
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("short write to " + path);
}

DisparityMap load_disparity_map(const std::string& path) {
  const auto buf = read_all(path);
  std::size_t pos = 0;

  auto read_line = [&](const char* what) {
    std::size_t end = pos;
    while (end < buf.size() && buf[end] != '\n') ++end;
    if (end >= buf.size())
      throw ParseError(std::string("truncated header: missing ") + what, pos);
    std::string line(buf.begin() + pos, buf.begin() + end);
    pos = end + 1;
    return line;
  };

  if (read_line("magic") != "Pf") throw ParseError("bad magic, expected Pf", 0);

  const std::size_t dims_at = pos;
  std::istringstream dims(read_line("dimensions"));
  long w = 0;
  long h = 0;
  if (!(dims >> w >> h) || w <= 0 || h <= 0)
    throw ParseError("bad dimensions line", dims_at);

  const std::size_t scale_at = pos;
  std::istringstream scale_line(read_line("scale"));
  double scale = 0.0;
  if (!(scale_line >> scale) || scale == 0.0)
    throw ParseError("bad scale line", scale_at);

  const std::size_t expected = static_cast<std::size_t>(w) * h * sizeof(float);
  if (buf.size() - pos != expected)
    throw ParseError("payload size does not match dimensions", buf.size());

  DisparityMap map = DisparityMap::all_invalid(static_cast<int>(w), static_cast<int>(h));
  std::memcpy(map.values.data(), buf.data() + pos, expected);
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    map.valid[i] = std::isnan(map.values[i]) ? 0 : 1;
  }
  return map;
}

}  // namespace oad
