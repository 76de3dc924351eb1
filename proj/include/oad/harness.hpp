#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oad/attacks.hpp"
#include "oad/detection.hpp"
#include "oad/geometry.hpp"
#include "oad/identification.hpp"
#include "oad/scene.hpp"
#include "oad/sensors.hpp"

namespace oad {

// The three calibrated pipelines: LiDAR + stereo pair, camera triple, and the
// multi-camera identification rig (thresholds per triple per recursion level).
enum class Pipeline { kScenario1, kScenario2, kIdentification };

const char* pipeline_name(Pipeline p);

struct AttackConfig {
  LidarSpoofParams spoof;
  double facula_radius_min = 187.0;
  double facula_radius_max = 375.0;
};

struct SweepConfig {
  std::vector<double> spoof_widths{0.5, 1.0, 1.5, 2.0, 2.5};
  std::vector<double> facula_radii{37.5, 75.0, 112.5, 150.0, 187.5, 225.0};
  int frames = 500;
};

struct ExperimentConfig {
  std::uint64_t seed = 20260809;
  int frames = 1000;
  int calibration_frames = 1000;
  double r = 0.01;
  int threads = 0;  // 0 = hardware concurrency
  std::string output_dir = "out";
  RigConfig rig;
  SceneParams scene;
  EstimatorNoiseModel noise;
  AttackConfig attacks;
  SweepConfig sweep;
};

// Paper-style defaults: 1242x375 images, f = 721 px, three cameras spanning a
// 0.54 m rig, HDL-64-like beam fan, 2.5 x 1.5 m spoof block at 6-10 m,
// faculae of radius 187-375 px.
ExperimentConfig default_config();

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& config);

// The false-alarm grid reported by every experiment (Table-style sweeps).
const std::vector<double>& r_sweep_grid();

/// No-attack disparity-error samples per triple per pipeline; thresholds for
/// any designated false alarm rate are derived from the stored samples.
struct Calibration {
  double r = 0.01;
  int sample_count = 0;
  std::map<Pipeline, std::map<std::array<int, 3>, std::vector<double>>> samples;

  ThresholdSet thresholds(Pipeline pipeline, double r_value) const;
  bool has_pipeline(Pipeline pipeline) const { return samples.count(pipeline) != 0; }
};

Calibration calibrate(const ExperimentConfig& config);

void save_calibration(const Calibration& cal, const std::string& path);
Calibration load_calibration(const std::string& path);

// Fresh no-attack error samples from a stream disjoint from calibration's.
std::vector<double> sample_no_attack_errors(const ExperimentConfig& config,
                                            Pipeline pipeline, int frames,
                                            std::uint64_t stream_salt);

// ---------------------------------------------------------------------------
// Experiments

struct DetectionCaseResult {
  std::string name;
  std::vector<int> attacked;
  std::vector<double> frame_errors;
  std::vector<double> rates;  // aligned with DetectionReport::r_values
};

struct DetectionScenarioResult {
  int scenario = 1;
  std::vector<double> thetas;  // aligned with r_values
  std::vector<DetectionCaseResult> cases;
};

struct DetectionReport {
  std::uint64_t seed = 0;
  double r_config = 0.0;
  int frames_per_case = 0;
  std::vector<double> r_values;
  std::vector<DetectionScenarioResult> scenarios;
};

// One attack case; thetas must align with r_values.
DetectionCaseResult run_detection_case(const ExperimentConfig& config, int scenario,
                                       const std::vector<int>& attacked, int frames,
                                       const std::vector<double>& r_values,
                                       const std::vector<double>& thetas);

// All eight attack cases of one scenario (1, 2) or both (0).
DetectionReport run_detection_experiment(const ExperimentConfig& config,
                                         const Calibration& cal, int scenario = 0);

struct IdentificationCaseResult {
  std::string name;
  std::vector<int> attacked;
  // Per frame, per recursion level (reference n down to 3), the pairwise
  // disparity errors in lexicographic pair order.
  std::vector<std::vector<std::vector<double>>> frame_level_errors;
  std::vector<IdentificationResult> frame_results;  // at the configured r
  std::vector<double> rates;                        // aligned with r_values
};

struct IdentificationReport {
  std::uint64_t seed = 0;
  double r_config = 0.0;
  int frames_per_case = 0;
  int camera_count = 0;
  std::vector<double> r_values;
  // Per r value, the calibrated theta for every (i, j, reference) triple.
  std::vector<std::map<std::array<int, 3>, double>> thresholds_by_r;
  std::vector<IdentificationCaseResult> cases;
};

IdentificationReport run_identification_experiment(const ExperimentConfig& config,
                                                   const Calibration& cal);

enum class SweepAxis { kSpoofWidth, kFaculaCoverage };

struct SweepPoint {
  double value = 0.0;   // spoof width in meters, or facula coverage percent
  double radius = 0.0;  // facula radius in pixels (facula axis only)
  std::vector<double> frame_errors;
  double detection_rate = 0.0;
};

struct SweepReport {
  std::uint64_t seed = 0;
  std::string axis;
  double r = 0.0;
  double theta = 0.0;
  int frames_per_point = 0;
  std::vector<SweepPoint> points;
};

SweepReport run_sensitivity_sweep(const ExperimentConfig& config, const Calibration& cal,
                                  SweepAxis axis);

// ---------------------------------------------------------------------------
// Reports on disk

std::string detection_report_json(const DetectionReport& report);
std::string identification_report_json(const IdentificationReport& report);
std::string sweep_report_json(const SweepReport& report);

std::string detection_summary(const DetectionReport& report);
std::string identification_summary(const IdentificationReport& report);
std::string sweep_summary(const SweepReport& report);

// Writes report.json plus the experiment's CSV views (summary.csv and
// histograms.csv, or sweep.csv) into the directory.
void write_detection_outputs(const DetectionReport& report, const std::string& dir);
void write_identification_outputs(const IdentificationReport& report,
                                  const std::string& dir);
void write_sweep_outputs(const SweepReport& report, const std::string& dir);

// Loads any report.json, recomputes every aggregate from the per-frame
// records and checks it matches; returns a printable summary. Throws
// ContractError on inconsistency.
std::string verify_report_file(const std::string& path);

// E-value histogram with 2.5-percentage-point bins over [0, 1].
std::vector<long> error_histogram(const std::vector<double>& errors);
constexpr int kHistogramBins = 40;

}  // namespace oad
