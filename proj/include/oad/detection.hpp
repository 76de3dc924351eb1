#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "oad/sensors.hpp"
#include "oad/types.hpp"

namespace oad {

// Pixel-level consistency test: two disparities disagree when they differ by
// more than 3 px AND by more than 5% of the smaller one.
constexpr double kAbsoluteTolerancePx = 3.0;
constexpr double kRelativeTolerance = 0.05;

/// Fraction of common-valid pixels whose disparities disagree between two
/// maps of the same reference view.
struct DisparityError {
  double value = 0.0;
  long inconsistent_count = 0;
  long valid_count = 0;
  std::array<int, 3> triple{-1, -1, -1};
};

struct ThresholdEntry {
  double theta = 0.0;
  double sample_min = 0.0;
  double sample_max = 0.0;
  int sample_count = 0;
};

/// Per-triple detection thresholds calibrated from no-attack error samples at
/// a designated false alarm rate r.
struct ThresholdSet {
  double r = 0.0;
  std::map<std::array<int, 3>, ThresholdEntry> entries;

  double theta(int i, int j, int k) const;  // ContractError when missing
  bool has(int i, int j, int k) const;
};

bool pixel_inconsistent(double d_a, double d_b);

// Throws ContractError on dimension mismatch or empty mask intersection.
DisparityError disparity_error(const DisparityMap& map_a, const DisparityMap& map_b);

// Empirical (1-r)-quantile by order statistic: the ceil((1-r)*M)-th smallest
// sample (r = 0 gives the maximum). Throws DomainError on empty samples or
// r outside [0,1].
double calibrate_threshold(std::span<const double> samples, double r);

// Strictly greater-than test against the calibrated threshold.
bool detect(const DisparityError& error, double theta);

struct ScenarioOutcome {
  DisparityError error;
  bool under_attack = false;
};

// LiDAR + two cameras: the estimator map for the pair is compared against
// the cloud projected onto the reference view at the pair's baseline.
// Faculae are tagged 1 or 2 (the cameras of the pair).
ScenarioOutcome run_scenario1(const PointCloud& cloud, const DisparityMap& truth_pair,
                              const CameraModel& reference, double stereo_baseline,
                              const EstimatorNoiseModel& noise,
                              std::span<const TaggedFacula> faculae, double theta,
                              std::uint64_t seed);

// Three cameras: both maps come from the estimator; the wider pair's map is
// rescaled to the (S1,S2) baseline before comparison. Faculae are tagged
// 0, 1 or 2.
ScenarioOutcome run_scenario2(const DisparityMap& truth_02, double baseline_02,
                              const DisparityMap& truth_12, double baseline_12,
                              const EstimatorNoiseModel& noise,
                              std::span<const TaggedFacula> faculae, double theta,
                              std::uint64_t seed);

// Collects the masks whose sensor tag matches either member of a pair.
std::vector<FaculaMask> masks_for_pair(std::span<const TaggedFacula> faculae, int sensor_a,
                                       int sensor_b);

}  // namespace oad
