#include "oad/detection.hpp"

#include <algorithm>
#include <cmath>

#include "oad/errors.hpp"
#include "oad/rng.hpp"

namespace oad {

double ThresholdSet::theta(int i, int j, int k) const {
  const auto it = entries.find({i, j, k});
  if (it == entries.end())
    throw ContractError("no calibrated threshold for triple (" + std::to_string(i) + "," +
                        std::to_string(j) + "," + std::to_string(k) + ")");
  return it->second.theta;
}

bool ThresholdSet::has(int i, int j, int k) const {
  return entries.count({i, j, k}) != 0;
}

bool pixel_inconsistent(double d_a, double d_b) {
  const double diff = std::abs(d_a - d_b);
  if (!(diff > kAbsoluteTolerancePx)) return false;
  const double smaller = std::min(d_a, d_b);
  // A zero denominator with a large difference counts as inconsistent.
  if (smaller <= 0.0) return true;
  return diff / smaller > kRelativeTolerance;
}

DisparityError disparity_error(const DisparityMap& map_a, const DisparityMap& map_b) {
  if (map_a.width != map_b.width || map_a.height != map_b.height)
    throw ContractError("disparity maps differ in size");

  DisparityError e;
  const std::size_t n = map_a.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    if (!map_a.valid[i] || !map_b.valid[i]) continue;
    ++e.valid_count;
    if (pixel_inconsistent(map_a.values[i], map_b.values[i])) ++e.inconsistent_count;
  }
  if (e.valid_count == 0)
    throw ContractError("disparity maps share no valid pixels");
  e.value = static_cast<double>(e.inconsistent_count) / e.valid_count;
  return e;
}

double calibrate_threshold(std::span<const double> samples, double r) {
  if (samples.empty()) throw DomainError("threshold calibration needs samples");
  if (!(r >= 0.0 && r <= 1.0)) throw DomainError("false alarm rate must lie in [0,1]");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  auto k = static_cast<std::ptrdiff_t>(std::ceil((1.0 - r) * m - 1e-9));
  k = std::clamp<std::ptrdiff_t>(k, 1, static_cast<std::ptrdiff_t>(sorted.size()));
  return sorted[static_cast<std::size_t>(k - 1)];
}

bool detect(const DisparityError& error, double theta) { return error.value > theta; }

std::vector<FaculaMask> masks_for_pair(std::span<const TaggedFacula> faculae, int sensor_a,
                                       int sensor_b) {
  std::vector<FaculaMask> masks;
  for (const auto& f : faculae) {
    if (f.sensor == sensor_a || f.sensor == sensor_b) masks.push_back(f.mask);
  }
  return masks;
}

ScenarioOutcome run_scenario1(const PointCloud& cloud, const DisparityMap& truth_pair,
                              const CameraModel& reference, double stereo_baseline,
                              const EstimatorNoiseModel& noise,
                              std::span<const TaggedFacula> faculae, double theta,
                              std::uint64_t seed) {
  const auto masks = masks_for_pair(faculae, 1, 2);
  const DisparityMap estimated =
      estimate_stereo_disparity(truth_pair, noise, masks, derive_seed(seed, 0xe5712u));
  DisparityMap projected = lidar_to_disparity(cloud, reference, stereo_baseline);

  ScenarioOutcome out;
  out.error = disparity_error(projected, estimated);
  out.error.triple = {0, 1, 2};
  out.under_attack = detect(out.error, theta);
  return out;
}

ScenarioOutcome run_scenario2(const DisparityMap& truth_02, double baseline_02,
                              const DisparityMap& truth_12, double baseline_12,
                              const EstimatorNoiseModel& noise,
                              std::span<const TaggedFacula> faculae, double theta,
                              std::uint64_t seed) {
  const auto masks_02 = masks_for_pair(faculae, 0, 2);
  const auto masks_12 = masks_for_pair(faculae, 1, 2);
  DisparityMap map_02 =
      estimate_stereo_disparity(truth_02, noise, masks_02, derive_seed(seed, 0xe5702u));
  map_02 = rescale_disparity(map_02, baseline_02, baseline_12);
  const DisparityMap map_12 =
      estimate_stereo_disparity(truth_12, noise, masks_12, derive_seed(seed, 0xe5701u));

  ScenarioOutcome out;
  out.error = disparity_error(map_02, map_12);
  out.error.triple = {0, 1, 2};
  out.under_attack = detect(out.error, theta);
  return out;
}

}  // namespace oad
