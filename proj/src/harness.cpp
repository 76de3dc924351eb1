#include "oad/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "oad/errors.hpp"
#include "oad/io.hpp"
#include "oad/rng.hpp"

namespace oad {

using nlohmann::json;

namespace {

// Stream salts keep calibration, evaluation and experiment frames on
// disjoint deterministic seed streams.
constexpr std::uint64_t kStreamCalScenario1 = 0x0c01;
constexpr std::uint64_t kStreamCalScenario2 = 0x0c02;
constexpr std::uint64_t kStreamCalIdentification = 0x0c03;
constexpr std::uint64_t kStreamDetScenario1 = 0x0d01;
constexpr std::uint64_t kStreamDetScenario2 = 0x0d02;
constexpr std::uint64_t kStreamIdentification = 0x1de0;
constexpr std::uint64_t kStreamSweepSpoof = 0x50f0;
constexpr std::uint64_t kStreamSweepFacula = 0xfac0;

// Per-frame sub-stream salts.
constexpr std::uint64_t kSaltScene = 1;
constexpr std::uint64_t kSaltLidar = 2;
constexpr std::uint64_t kSaltSpoof = 3;
constexpr std::uint64_t kSaltFaculaRadius = 4;
constexpr std::uint64_t kSaltFaculaPos = 5;
constexpr std::uint64_t kSaltEstimator = 6;

constexpr double kSweepR = 0.01;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

std::string case_name(const std::vector<int>& attacked) {
  if (attacked.empty()) return "none";
  std::string name;
  for (const int s : attacked) {
    if (!name.empty()) name += "+";
    name += "S" + std::to_string(s);
  }
  return name;
}

void parallel_frames(int count, int threads_config, const std::function<void(int)>& fn) {
  int threads = threads_config > 0
                    ? threads_config
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

TaggedFacula frame_facula(const ExperimentConfig& cfg, std::uint64_t frame_seed, int sensor,
                          std::optional<double> fixed_radius) {
  double radius;
  if (fixed_radius) {
    radius = *fixed_radius;
  } else {
    Rng rng(derive_seed(frame_seed, kSaltFaculaRadius, static_cast<std::uint64_t>(sensor)));
    radius = rng.uniform(cfg.attacks.facula_radius_min, cfg.attacks.facula_radius_max);
  }
  const auto& cam = cfg.rig.cameras.front();
  return TaggedFacula{
      sensor, make_facula(cam.image_width, cam.image_height, radius, std::nullopt,
                          derive_seed(frame_seed, kSaltFaculaPos,
                                      static_cast<std::uint64_t>(sensor)))};
}

PointCloud frame_cloud(const ExperimentConfig& cfg, const Scene& scene,
                       std::uint64_t frame_seed, bool spoofed,
                       std::optional<double> spoof_width = std::nullopt) {
  auto cloud = sample_lidar(scene, cfg.rig.lidar, cfg.rig.lidar_pose,
                            derive_seed(frame_seed, kSaltLidar));
  if (spoofed) {
    auto spoof = cfg.attacks.spoof;
    if (spoof_width) spoof.width = *spoof_width;
    spoof.seed = derive_seed(frame_seed, kSaltSpoof);
    cloud = inject_lidar_spoof(cloud, spoof, cfg.rig.lidar_pose);
  }
  return cloud;
}

double scenario1_frame_error(const ExperimentConfig& cfg, std::uint64_t frame_seed,
                             const std::vector<int>& attacked,
                             std::optional<double> fixed_facula_radius = std::nullopt,
                             std::optional<double> spoof_width = std::nullopt) {
  const auto scene = generate_scene(cfg.scene, derive_seed(frame_seed, kSaltScene));
  const auto& s1 = cfg.rig.cameras.front();
  const auto& s2 = cfg.rig.cameras.back();
  const double b = s2.baseline_position - s1.baseline_position;

  const auto cloud = frame_cloud(cfg, scene, frame_seed, contains(attacked, 0), spoof_width);
  const auto truth = render_truth_disparity(scene, s2, s1, cfg.noise.d_max);

  std::vector<TaggedFacula> faculae;
  for (const int sensor : {1, 2}) {
    if (contains(attacked, sensor))
      faculae.push_back(frame_facula(cfg, frame_seed, sensor, fixed_facula_radius));
  }
  const auto outcome = run_scenario1(cloud, truth, s2, b, cfg.noise, faculae, kInf,
                                     derive_seed(frame_seed, kSaltEstimator));
  return outcome.error.value;
}

double scenario2_frame_error(const ExperimentConfig& cfg, std::uint64_t frame_seed,
                             const std::vector<int>& attacked) {
  const auto scene = generate_scene(cfg.scene, derive_seed(frame_seed, kSaltScene));
  const auto& s0 = cfg.rig.cameras[0];
  const auto& s1 = cfg.rig.cameras[1];
  const auto& s2 = cfg.rig.cameras[2];
  const double b02 = s2.baseline_position - s0.baseline_position;
  const double b12 = s2.baseline_position - s1.baseline_position;

  const auto truth_02 = render_truth_disparity(scene, s2, s0, cfg.noise.d_max);
  const auto truth_12 = render_truth_disparity(scene, s2, s1, cfg.noise.d_max);

  std::vector<TaggedFacula> faculae;
  for (const int sensor : {0, 1, 2}) {
    if (contains(attacked, sensor))
      faculae.push_back(frame_facula(cfg, frame_seed, sensor, std::nullopt));
  }
  const auto outcome = run_scenario2(truth_02, b02, truth_12, b12, cfg.noise, faculae,
                                     kInf, derive_seed(frame_seed, kSaltEstimator));
  return outcome.error.value;
}

// Pairwise errors for every recursion level (reference n down to 3), each
// level's maps regenerated against its own reference camera.
std::vector<std::vector<double>> identification_frame_levels(
    const ExperimentConfig& cfg, std::uint64_t frame_seed,
    const std::vector<int>& attacked) {
  const auto scene = generate_scene(cfg.scene, derive_seed(frame_seed, kSaltScene));
  const auto& cams = cfg.rig.cameras;
  const int n = static_cast<int>(cams.size());

  const auto cloud = frame_cloud(cfg, scene, frame_seed, contains(attacked, 0));

  std::vector<TaggedFacula> faculae;
  for (int sensor = 1; sensor <= n; ++sensor) {
    if (contains(attacked, sensor))
      faculae.push_back(frame_facula(cfg, frame_seed, sensor, std::nullopt));
  }

  std::vector<std::vector<double>> levels;
  levels.reserve(n - 2);
  for (int m = n; m >= 3; --m) {
    const auto& ref = cams[m - 1];
    const double b_common = ref.baseline_position - cams[m - 2].baseline_position;

    std::vector<DisparityMap> maps;
    maps.reserve(m);
    maps.push_back(lidar_to_disparity(cloud, ref, b_common));
    for (int i = 1; i < m; ++i) {
      const auto truth = render_truth_disparity(scene, ref, cams[i - 1], cfg.noise.d_max);
      const auto masks = masks_for_pair(faculae, i, m);
      auto est = estimate_stereo_disparity(
          truth, cfg.noise, masks,
          derive_seed(frame_seed, kSaltEstimator, static_cast<std::uint64_t>(m),
                      static_cast<std::uint64_t>(i)));
      const double b_native = ref.baseline_position - cams[i - 1].baseline_position;
      if (i != m - 1) est = rescale_disparity(est, b_native, b_common);
      maps.push_back(std::move(est));
    }

    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    for (int i = 0; i + 1 < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        values.push_back(disparity_error(maps[i], maps[j]).value);
      }
    }
    levels.push_back(std::move(values));
  }
  return levels;
}

IdentificationResult identify_from_levels(const std::vector<std::vector<double>>& levels,
                                          int n, const ThresholdSet& thresholds) {
  const auto provider = [&](int m) {
    ErrorStateVector e(m);
    const auto& values = levels.at(static_cast<std::size_t>(n - m));
    std::size_t idx = 0;
    for (int i = 0; i + 1 < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        e.set(i, j, values.at(idx) > thresholds.theta(i, j, m));
        ++idx;
      }
    }
    return e;
  };
  return identify(n, provider);
}

std::vector<double> report_r_values(double r_config) {
  std::vector<double> values = r_sweep_grid();
  if (std::find(values.begin(), values.end(), r_config) == values.end())
    values.push_back(r_config);
  std::sort(values.begin(), values.end());
  return values;
}

double rate_above(const std::vector<double>& errors, double theta) {
  if (errors.empty()) return 0.0;
  long hits = 0;
  for (const double e : errors) hits += e > theta;
  return static_cast<double>(hits) / static_cast<double>(errors.size());
}

const std::vector<std::vector<int>>& detection_cases() {
  static const std::vector<std::vector<int>> cases{
      {}, {0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}};
  return cases;
}

}  // namespace

const char* pipeline_name(Pipeline p) {
  switch (p) {
    case Pipeline::kScenario1:
      return "scenario1";
    case Pipeline::kScenario2:
      return "scenario2";
    case Pipeline::kIdentification:
      return "identification";
  }
  return "unknown";
}

const std::vector<double>& r_sweep_grid() {
  static const std::vector<double> grid{0.0, 0.01, 0.02, 0.03, 0.05};
  return grid;
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  CameraModel cam;
  cam.focal_length = 721.0;
  cam.image_width = 1242;
  cam.image_height = 375;
  cam.principal_point = {1242 / 2.0, 375 / 2.0};
  for (int i = 0; i < 3; ++i) {
    cam.id = i;
    cam.baseline_position = 0.27 * i;
    cfg.rig.cameras.push_back(cam);
  }
  return cfg;
}

ThresholdSet Calibration::thresholds(Pipeline pipeline, double r_value) const {
  const auto it = samples.find(pipeline);
  if (it == samples.end())
    throw ContractError(std::string("pipeline not calibrated: ") + pipeline_name(pipeline));
  ThresholdSet set;
  set.r = r_value;
  for (const auto& [triple, values] : it->second) {
    ThresholdEntry entry;
    entry.theta = calibrate_threshold(values, r_value);
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    entry.sample_min = *mn;
    entry.sample_max = *mx;
    entry.sample_count = static_cast<int>(values.size());
    set.entries[triple] = entry;
  }
  return set;
}

std::vector<double> sample_no_attack_errors(const ExperimentConfig& config,
                                            Pipeline pipeline, int frames,
                                            std::uint64_t stream_salt) {
  if (pipeline == Pipeline::kIdentification)
    throw ContractError("no-attack sampling by triple uses calibrate() for this pipeline");
  std::vector<double> errors(frames, 0.0);
  parallel_frames(frames, config.threads, [&](int i) {
    const std::uint64_t frame_seed =
        derive_seed(config.seed, stream_salt, static_cast<std::uint64_t>(i));
    errors[i] = pipeline == Pipeline::kScenario1
                    ? scenario1_frame_error(config, frame_seed, {})
                    : scenario2_frame_error(config, frame_seed, {});
  });
  return errors;
}

Calibration calibrate(const ExperimentConfig& config) {
  validate_config(config);
  if (config.calibration_frames < 100) {
    std::cerr << "warning: calibrating from only " << config.calibration_frames
              << " frames; thresholds will be coarse\n";
  }

  Calibration cal;
  cal.r = config.r;
  cal.sample_count = config.calibration_frames;
  const int frames = config.calibration_frames;
  const int n = config.rig.camera_count();

  if (config.rig.lidar_present && n >= 2) {
    cal.samples[Pipeline::kScenario1][{0, 1, 2}] =
        sample_no_attack_errors(config, Pipeline::kScenario1, frames, kStreamCalScenario1);
  }
  if (n >= 3) {
    cal.samples[Pipeline::kScenario2][{0, 1, 2}] =
        sample_no_attack_errors(config, Pipeline::kScenario2, frames, kStreamCalScenario2);
  }
  if (config.rig.lidar_present && n >= 3) {
    std::vector<std::vector<std::vector<double>>> per_frame(frames);
    parallel_frames(frames, config.threads, [&](int i) {
      const std::uint64_t frame_seed =
          derive_seed(config.seed, kStreamCalIdentification, static_cast<std::uint64_t>(i));
      per_frame[i] = identification_frame_levels(config, frame_seed, {});
    });
    auto& triples = cal.samples[Pipeline::kIdentification];
    for (int level = 0; level <= n - 3; ++level) {
      const int m = n - level;
      std::size_t idx = 0;
      for (int i = 0; i + 1 < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
          auto& bucket = triples[{i, j, m}];
          bucket.reserve(frames);
          for (int fr = 0; fr < frames; ++fr) {
            bucket.push_back(per_frame[fr][level][idx]);
          }
          ++idx;
        }
      }
    }
  }
  return cal;
}

// ---------------------------------------------------------------------------
// Experiments

DetectionCaseResult run_detection_case(const ExperimentConfig& config, int scenario,
                                       const std::vector<int>& attacked, int frames,
                                       const std::vector<double>& r_values,
                                       const std::vector<double>& thetas) {
  if (scenario != 1 && scenario != 2) throw ConfigError("scenario must be 1 or 2");
  if (r_values.size() != thetas.size())
    throw ContractError("one threshold per designated rate required");

  DetectionCaseResult result;
  result.name = case_name(attacked);
  result.attacked = attacked;
  result.frame_errors.assign(frames, 0.0);

  const std::uint64_t stream =
      scenario == 1 ? kStreamDetScenario1 : kStreamDetScenario2;
  parallel_frames(frames, config.threads, [&](int i) {
    const std::uint64_t frame_seed =
        derive_seed(config.seed, stream, static_cast<std::uint64_t>(i));
    result.frame_errors[i] = scenario == 1
                                 ? scenario1_frame_error(config, frame_seed, attacked)
                                 : scenario2_frame_error(config, frame_seed, attacked);
  });

  result.rates.reserve(thetas.size());
  for (const double theta : thetas) {
    result.rates.push_back(rate_above(result.frame_errors, theta));
  }
  return result;
}

DetectionReport run_detection_experiment(const ExperimentConfig& config,
                                         const Calibration& cal, int scenario) {
  validate_config(config);
  DetectionReport report;
  report.seed = config.seed;
  report.r_config = config.r;
  report.frames_per_case = config.frames;
  report.r_values = report_r_values(config.r);

  std::vector<int> scenarios;
  if (scenario == 0) {
    if (config.rig.lidar_present && config.rig.camera_count() >= 2) scenarios.push_back(1);
    if (config.rig.camera_count() >= 3) scenarios.push_back(2);
  } else {
    scenarios.push_back(scenario);
  }
  if (scenarios.empty()) throw ConfigError("rig supports neither detection scenario");

  for (const int s : scenarios) {
    const Pipeline pipeline = s == 1 ? Pipeline::kScenario1 : Pipeline::kScenario2;
    DetectionScenarioResult sr;
    sr.scenario = s;
    for (const double r : report.r_values) {
      sr.thetas.push_back(cal.thresholds(pipeline, r).theta(0, 1, 2));
    }
    for (const auto& attacked : detection_cases()) {
      sr.cases.push_back(run_detection_case(config, s, attacked, config.frames,
                                            report.r_values, sr.thetas));
    }
    report.scenarios.push_back(std::move(sr));
  }
  return report;
}

IdentificationReport run_identification_experiment(const ExperimentConfig& config,
                                                   const Calibration& cal) {
  validate_config(config);
  const int n = config.rig.camera_count();
  if (!config.rig.lidar_present || n < 3)
    throw ConfigError("identification needs the LiDAR plus at least three cameras");

  IdentificationReport report;
  report.seed = config.seed;
  report.r_config = config.r;
  report.frames_per_case = config.frames;
  report.camera_count = n;
  report.r_values = report_r_values(config.r);

  std::vector<std::vector<int>> cases{{}};
  for (int s = 0; s <= n; ++s) cases.push_back({s});

  for (const double r : report.r_values) {
    const auto set = cal.thresholds(Pipeline::kIdentification, r);
    std::map<std::array<int, 3>, double> thetas;
    for (const auto& [triple, entry] : set.entries) thetas[triple] = entry.theta;
    report.thresholds_by_r.push_back(std::move(thetas));
  }

  const auto config_set = cal.thresholds(Pipeline::kIdentification, config.r);

  for (const auto& attacked : cases) {
    IdentificationCaseResult cr;
    cr.name = case_name(attacked);
    cr.attacked = attacked;
    cr.frame_level_errors.resize(config.frames);
    parallel_frames(config.frames, config.threads, [&](int i) {
      const std::uint64_t frame_seed =
          derive_seed(config.seed, kStreamIdentification, static_cast<std::uint64_t>(i));
      cr.frame_level_errors[i] = identification_frame_levels(config, frame_seed, attacked);
    });

    cr.frame_results.reserve(config.frames);
    for (int i = 0; i < config.frames; ++i) {
      cr.frame_results.push_back(identify_from_levels(cr.frame_level_errors[i], n, config_set));
    }

    for (const double r : report.r_values) {
      const auto set = cal.thresholds(Pipeline::kIdentification, r);
      long correct = 0;
      for (int i = 0; i < config.frames; ++i) {
        const auto result = identify_from_levels(cr.frame_level_errors[i], n, set);
        correct += result.attacked == attacked;
      }
      cr.rates.push_back(static_cast<double>(correct) / config.frames);
    }
    report.cases.push_back(std::move(cr));
  }
  return report;
}

SweepReport run_sensitivity_sweep(const ExperimentConfig& config, const Calibration& cal,
                                  SweepAxis axis) {
  validate_config(config);
  SweepReport report;
  report.seed = config.seed;
  report.axis = axis == SweepAxis::kSpoofWidth ? "spoof_width" : "facula_coverage";
  report.r = kSweepR;
  report.theta = cal.thresholds(Pipeline::kScenario1, kSweepR).theta(0, 1, 2);
  report.frames_per_point = config.sweep.frames;

  const auto& cam = config.rig.cameras.front();
  const double pixels = static_cast<double>(cam.image_width) * cam.image_height;
  const std::uint64_t stream =
      axis == SweepAxis::kSpoofWidth ? kStreamSweepSpoof : kStreamSweepFacula;

  const auto grid = axis == SweepAxis::kSpoofWidth ? config.sweep.spoof_widths
                                                   : config.sweep.facula_radii;
  for (const double g : grid) {
    SweepPoint point;
    std::vector<int> attacked;
    std::optional<double> fixed_radius;
    std::optional<double> spoof_width;
    if (axis == SweepAxis::kSpoofWidth) {
      point.value = g;
      if (g > 0.0) {
        attacked = {0};
        spoof_width = g;
      }
    } else {
      point.radius = g;
      point.value = 100.0 * 3.14159265358979323846 * g * g / pixels;
      if (g > 0.0) {
        attacked = {2};
        fixed_radius = g;
      }
    }

    point.frame_errors.assign(config.sweep.frames, 0.0);
    parallel_frames(config.sweep.frames, config.threads, [&](int i) {
      // Grid value deliberately absent from the seed: frames are matched
      // across grid points.
      const std::uint64_t frame_seed =
          derive_seed(config.seed, stream, static_cast<std::uint64_t>(i));
      point.frame_errors[i] =
          scenario1_frame_error(config, frame_seed, attacked, fixed_radius, spoof_width);
    });
    point.detection_rate = rate_above(point.frame_errors, report.theta);
    report.points.push_back(std::move(point));
  }
  return report;
}

std::vector<long> error_histogram(const std::vector<double>& errors) {
  std::vector<long> bins(kHistogramBins, 0);
  for (const double e : errors) {
    int bin = static_cast<int>(e * kHistogramBins);
    bin = std::clamp(bin, 0, kHistogramBins - 1);
    ++bins[bin];
  }
  return bins;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const char* context) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end())
      throw ConfigError(std::string("unknown key \"") + key + "\" in " + context);
  }
}

template <typename T>
void read_value(const json& obj, const char* key, T& out, const char* context) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for \"") + key + "\" in " + context);
  }
}

void read_pair(const json& obj, const char* key, std::pair<double, double>& out,
               const char* context) {
  if (!obj.contains(key)) return;
  const auto& arr = obj.at(key);
  if (!arr.is_array() || arr.size() != 2)
    throw ConfigError(std::string("\"") + key + "\" in " + context +
                      " must be a [min, max] pair");
  try {
    out = {arr.at(0).get<double>(), arr.at(1).get<double>()};
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for \"") + key + "\" in " + context);
  }
}

void read_pair(const json& obj, const char* key, std::pair<int, int>& out,
               const char* context) {
  std::pair<double, double> tmp{static_cast<double>(out.first),
                                static_cast<double>(out.second)};
  read_pair(obj, key, tmp, context);
  out = {static_cast<int>(tmp.first), static_cast<int>(tmp.second)};
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");

  ExperimentConfig cfg = default_config();
  check_keys(root,
             {"seed", "frames", "calibration_frames", "r", "threads", "output_dir", "rig",
              "scene", "noise", "attacks", "sweep"},
             "config");
  read_value(root, "seed", cfg.seed, "config");
  read_value(root, "frames", cfg.frames, "config");
  read_value(root, "calibration_frames", cfg.calibration_frames, "config");
  read_value(root, "r", cfg.r, "config");
  read_value(root, "threads", cfg.threads, "config");
  read_value(root, "output_dir", cfg.output_dir, "config");

  if (root.contains("rig")) {
    const auto& rig = root.at("rig");
    check_keys(rig,
               {"image_width", "image_height", "focal_length", "principal_point",
                "camera_baselines", "lidar"},
               "rig");
    int w = cfg.rig.cameras.front().image_width;
    int h = cfg.rig.cameras.front().image_height;
    double f = cfg.rig.cameras.front().focal_length;
    read_value(rig, "image_width", w, "rig");
    read_value(rig, "image_height", h, "rig");
    read_value(rig, "focal_length", f, "rig");
    PixelCoord pp{w / 2.0, h / 2.0};
    if (rig.contains("principal_point")) {
      const auto& arr = rig.at("principal_point");
      if (!arr.is_array() || arr.size() != 2)
        throw ConfigError("rig.principal_point must be [u, v]");
      pp = {arr.at(0).get<double>(), arr.at(1).get<double>()};
    }
    std::vector<double> baselines;
    for (const auto& cam : cfg.rig.cameras) baselines.push_back(cam.baseline_position);
    if (rig.contains("camera_baselines")) {
      try {
        baselines = rig.at("camera_baselines").get<std::vector<double>>();
      } catch (const json::exception&) {
        throw ConfigError("rig.camera_baselines must be an array of numbers");
      }
    }
    cfg.rig.cameras.clear();
    for (std::size_t i = 0; i < baselines.size(); ++i) {
      CameraModel cam;
      cam.id = static_cast<int>(i);
      cam.focal_length = f;
      cam.image_width = w;
      cam.image_height = h;
      cam.principal_point = pp;
      cam.baseline_position = baselines[i];
      cfg.rig.cameras.push_back(cam);
    }
    if (rig.contains("lidar")) {
      const auto& lidar = rig.at("lidar");
      check_keys(lidar,
                 {"present", "pose", "channels", "elevation_deg", "azimuth_deg",
                  "azimuth_step_deg", "range_jitter_sigma"},
                 "rig.lidar");
      read_value(lidar, "present", cfg.rig.lidar_present, "rig.lidar");
      if (lidar.contains("pose")) {
        const auto& arr = lidar.at("pose");
        if (!arr.is_array() || arr.size() != 3)
          throw ConfigError("rig.lidar.pose must be [x, y, z]");
        cfg.rig.lidar_pose = {arr.at(0).get<double>(), arr.at(1).get<double>(),
                              arr.at(2).get<double>()};
      }
      read_value(lidar, "channels", cfg.rig.lidar.channels, "rig.lidar");
      std::pair<double, double> elev{cfg.rig.lidar.elevation_min_deg,
                                     cfg.rig.lidar.elevation_max_deg};
      read_pair(lidar, "elevation_deg", elev, "rig.lidar");
      cfg.rig.lidar.elevation_min_deg = elev.first;
      cfg.rig.lidar.elevation_max_deg = elev.second;
      std::pair<double, double> az{cfg.rig.lidar.azimuth_min_deg,
                                   cfg.rig.lidar.azimuth_max_deg};
      read_pair(lidar, "azimuth_deg", az, "rig.lidar");
      cfg.rig.lidar.azimuth_min_deg = az.first;
      cfg.rig.lidar.azimuth_max_deg = az.second;
      read_value(lidar, "azimuth_step_deg", cfg.rig.lidar.azimuth_step_deg, "rig.lidar");
      read_value(lidar, "range_jitter_sigma", cfg.rig.lidar.range_jitter_sigma,
                 "rig.lidar");
    }
  }

  if (root.contains("scene")) {
    const auto& scene = root.at("scene");
    check_keys(scene,
               {"obstacle_count", "depth_range", "width_range", "height_range",
                "ground_height", "background_depth", "lateral_spread"},
               "scene");
    read_pair(scene, "obstacle_count", cfg.scene.obstacle_count, "scene");
    read_pair(scene, "depth_range", cfg.scene.depth_range, "scene");
    read_pair(scene, "width_range", cfg.scene.width_range, "scene");
    read_pair(scene, "height_range", cfg.scene.height_range, "scene");
    read_value(scene, "ground_height", cfg.scene.ground_height, "scene");
    read_value(scene, "background_depth", cfg.scene.background_depth, "scene");
    read_value(scene, "lateral_spread", cfg.scene.lateral_spread, "scene");
  }

  if (root.contains("noise")) {
    const auto& noise = root.at("noise");
    check_keys(noise, {"gaussian_sigma", "outlier_fraction", "outlier_range", "d_max"},
               "noise");
    read_value(noise, "gaussian_sigma", cfg.noise.gaussian_sigma, "noise");
    read_value(noise, "outlier_fraction", cfg.noise.outlier_fraction, "noise");
    read_value(noise, "outlier_range", cfg.noise.outlier_range, "noise");
    read_value(noise, "d_max", cfg.noise.d_max, "noise");
  }

  if (root.contains("attacks")) {
    const auto& attacks = root.at("attacks");
    check_keys(attacks, {"spoof", "facula"}, "attacks");
    if (attacks.contains("spoof")) {
      const auto& spoof = attacks.at("spoof");
      check_keys(spoof,
                 {"width", "height", "distance_range", "lateral_offset", "point_density"},
                 "attacks.spoof");
      read_value(spoof, "width", cfg.attacks.spoof.width, "attacks.spoof");
      read_value(spoof, "height", cfg.attacks.spoof.height, "attacks.spoof");
      std::pair<double, double> dist{cfg.attacks.spoof.distance_min,
                                     cfg.attacks.spoof.distance_max};
      read_pair(spoof, "distance_range", dist, "attacks.spoof");
      cfg.attacks.spoof.distance_min = dist.first;
      cfg.attacks.spoof.distance_max = dist.second;
      read_value(spoof, "lateral_offset", cfg.attacks.spoof.lateral_offset,
                 "attacks.spoof");
      read_value(spoof, "point_density", cfg.attacks.spoof.point_density, "attacks.spoof");
    }
    if (attacks.contains("facula")) {
      const auto& facula = attacks.at("facula");
      check_keys(facula, {"radius_range"}, "attacks.facula");
      std::pair<double, double> radius{cfg.attacks.facula_radius_min,
                                       cfg.attacks.facula_radius_max};
      read_pair(facula, "radius_range", radius, "attacks.facula");
      cfg.attacks.facula_radius_min = radius.first;
      cfg.attacks.facula_radius_max = radius.second;
    }
  }

  if (root.contains("sweep")) {
    const auto& sweep = root.at("sweep");
    check_keys(sweep, {"spoof_widths", "facula_radii", "frames"}, "sweep");
    read_value(sweep, "spoof_widths", cfg.sweep.spoof_widths, "sweep");
    read_value(sweep, "facula_radii", cfg.sweep.facula_radii, "sweep");
    read_value(sweep, "frames", cfg.sweep.frames, "sweep");
  }

  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& config) {
  if (config.frames <= 0) throw ConfigError("frames must be positive");
  if (config.calibration_frames <= 0)
    throw ConfigError("calibration_frames must be positive");
  if (!(config.r >= 0.0 && config.r <= 1.0)) throw ConfigError("r must lie in [0,1]");
  if (config.threads < 0) throw ConfigError("threads must be >= 0");
  if (config.sweep.frames <= 0) throw ConfigError("sweep.frames must be positive");
  validate_rig(config.rig);
  generate_scene(config.scene, 0);  // range checks
  if (config.noise.gaussian_sigma < 0.0 || config.noise.outlier_range < 0.0 ||
      config.noise.outlier_fraction < 0.0 || config.noise.outlier_fraction > 1.0 ||
      config.noise.d_max <= 0.0)
    throw ConfigError("invalid noise model");
  if (config.attacks.spoof.width <= 0.0 || config.attacks.spoof.height <= 0.0 ||
      config.attacks.spoof.distance_min <= 0.0 ||
      config.attacks.spoof.distance_min > config.attacks.spoof.distance_max ||
      config.attacks.spoof.point_density < 0.0)
    throw ConfigError("invalid spoof parameters");
  if (config.attacks.facula_radius_min <= 0.0 ||
      config.attacks.facula_radius_min > config.attacks.facula_radius_max)
    throw ConfigError("invalid facula radius range");
}

// ---------------------------------------------------------------------------
// Calibration persistence

namespace {

std::array<int, 3> triple_from_json(const json& entry) {
  return {entry.at("i").get<int>(), entry.at("j").get<int>(), entry.at("k").get<int>()};
}

}  // namespace

void save_calibration(const Calibration& cal, const std::string& path) {
  json root;
  root["format"] = "oad-thresholds-v1";
  root["r"] = cal.r;
  root["sample_count"] = cal.sample_count;
  json pipelines = json::object();
  for (const auto& [pipeline, triples] : cal.samples) {
    json list = json::array();
    const auto set = cal.thresholds(pipeline, cal.r);
    for (const auto& [triple, values] : triples) {
      const auto& entry = set.entries.at(triple);
      json t;
      t["i"] = triple[0];
      t["j"] = triple[1];
      t["k"] = triple[2];
      t["theta"] = entry.theta;
      t["sample_min"] = entry.sample_min;
      t["sample_max"] = entry.sample_max;
      t["sample_count"] = entry.sample_count;
      t["samples"] = values;
      list.push_back(std::move(t));
    }
    pipelines[pipeline_name(pipeline)] = std::move(list);
  }
  root["pipelines"] = std::move(pipelines);

  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << root.dump(2) << "\n";
  if (!out) throw IoError("short write to " + path);
}

Calibration load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open thresholds file " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  try {
    if (root.at("format").get<std::string>() != "oad-thresholds-v1")
      throw ConfigError("unrecognized thresholds format");
    Calibration cal;
    cal.r = root.at("r").get<double>();
    cal.sample_count = root.at("sample_count").get<int>();
    for (const Pipeline p : {Pipeline::kScenario1, Pipeline::kScenario2,
                             Pipeline::kIdentification}) {
      const char* name = pipeline_name(p);
      if (!root.at("pipelines").contains(name)) continue;
      for (const auto& entry : root.at("pipelines").at(name)) {
        cal.samples[p][triple_from_json(entry)] =
            entry.at("samples").get<std::vector<double>>();
      }
    }
    return cal;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed thresholds file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Report serialization

namespace {

json case_to_json(const DetectionCaseResult& c) {
  json j;
  j["name"] = c.name;
  j["attacked"] = c.attacked;
  j["frame_errors"] = c.frame_errors;
  j["rates"] = c.rates;
  j["histogram"] = error_histogram(c.frame_errors);
  return j;
}

json identification_result_to_json(const IdentificationResult& r) {
  json j;
  j["attacked"] = r.attacked;
  j["resolved"] = r.resolved;
  json levels = json::array();
  for (const auto& level : r.levels) {
    json bits = json::array();
    for (const auto b : level.bits()) bits.push_back(static_cast<int>(b));
    levels.push_back(std::move(bits));
  }
  j["levels"] = std::move(levels);
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("short write to " + path);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string detection_report_json(const DetectionReport& report) {
  json root;
  root["format"] = "oad-report-v1";
  root["experiment"] = "detection";
  root["seed"] = report.seed;
  root["r_config"] = report.r_config;
  root["frames_per_case"] = report.frames_per_case;
  root["r_values"] = report.r_values;
  json scenarios = json::array();
  for (const auto& s : report.scenarios) {
    json js;
    js["scenario"] = s.scenario;
    js["thetas"] = s.thetas;
    json cases = json::array();
    for (const auto& c : s.cases) cases.push_back(case_to_json(c));
    js["cases"] = std::move(cases);
    scenarios.push_back(std::move(js));
  }
  root["scenarios"] = std::move(scenarios);
  return root.dump(2) + "\n";
}

std::string identification_report_json(const IdentificationReport& report) {
  json root;
  root["format"] = "oad-report-v1";
  root["experiment"] = "identification";
  root["seed"] = report.seed;
  root["r_config"] = report.r_config;
  root["frames_per_case"] = report.frames_per_case;
  root["camera_count"] = report.camera_count;
  root["r_values"] = report.r_values;
  json thresholds = json::array();
  for (const auto& by_triple : report.thresholds_by_r) {
    json list = json::array();
    for (const auto& [triple, theta] : by_triple) {
      json t;
      t["i"] = triple[0];
      t["j"] = triple[1];
      t["k"] = triple[2];
      t["theta"] = theta;
      list.push_back(std::move(t));
    }
    thresholds.push_back(std::move(list));
  }
  root["thresholds_by_r"] = std::move(thresholds);
  json cases = json::array();
  for (const auto& c : report.cases) {
    json jc;
    jc["name"] = c.name;
    jc["attacked"] = c.attacked;
    jc["frame_level_errors"] = c.frame_level_errors;
    json results = json::array();
    for (const auto& r : c.frame_results) {
      results.push_back(identification_result_to_json(r));
    }
    jc["frame_results"] = std::move(results);
    jc["rates"] = c.rates;
    cases.push_back(std::move(jc));
  }
  root["cases"] = std::move(cases);
  return root.dump(2) + "\n";
}

std::string sweep_report_json(const SweepReport& report) {
  json root;
  root["format"] = "oad-report-v1";
  root["experiment"] = "sweep";
  root["seed"] = report.seed;
  root["axis"] = report.axis;
  root["r"] = report.r;
  root["theta"] = report.theta;
  root["frames_per_point"] = report.frames_per_point;
  json points = json::array();
  for (const auto& p : report.points) {
    json jp;
    jp["value"] = p.value;
    jp["radius"] = p.radius;
    jp["frame_errors"] = p.frame_errors;
    jp["detection_rate"] = p.detection_rate;
    points.push_back(std::move(jp));
  }
  root["points"] = std::move(points);
  return root.dump(2) + "\n";
}

std::string detection_summary(const DetectionReport& report) {
  std::ostringstream out;
  out << "detection experiment: " << report.frames_per_case << " frames per case\n";
  for (const auto& s : report.scenarios) {
    out << "scenario " << s.scenario << "\n";
    out << "  case";
    for (const double r : report.r_values) out << "  r=" << format_double(r);
    out << "\n";
    for (const auto& c : s.cases) {
      out << "  " << c.name;
      for (const double rate : c.rates) out << "  " << format_double(rate);
      out << "\n";
    }
  }
  return out.str();
}

std::string identification_summary(const IdentificationReport& report) {
  std::ostringstream out;
  out << "identification experiment: " << report.frames_per_case
      << " frames per case, " << report.camera_count << " cameras\n";
  out << "  case";
  for (const double r : report.r_values) out << "  r=" << format_double(r);
  out << "\n";
  for (const auto& c : report.cases) {
    out << "  " << c.name;
    for (const double rate : c.rates) out << "  " << format_double(rate);
    out << "\n";
  }
  return out.str();
}

std::string sweep_summary(const SweepReport& report) {
  std::ostringstream out;
  out << "sensitivity sweep over " << report.axis << " (r=" << format_double(report.r)
      << ", theta=" << format_double(report.theta) << ")\n";
  for (const auto& p : report.points) {
    out << "  " << format_double(p.value) << " -> "
        << format_double(p.detection_rate) << "\n";
  }
  return out.str();
}

void write_detection_outputs(const DetectionReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir + "/report.json", detection_report_json(report));

  std::ostringstream summary;
  summary << "scenario,case,r,theta,frames,detections,detection_rate\n";
  std::ostringstream hist;
  hist << "scenario,case,bin_lo,bin_hi,count\n";
  for (const auto& s : report.scenarios) {
    for (const auto& c : s.cases) {
      for (std::size_t k = 0; k < report.r_values.size(); ++k) {
        const long detections =
            std::lround(c.rates[k] * static_cast<double>(report.frames_per_case));
        summary << s.scenario << "," << c.name << "," << format_double(report.r_values[k])
                << "," << format_double(s.thetas[k]) << "," << report.frames_per_case
                << "," << detections << "," << format_double(c.rates[k]) << "\n";
      }
      const auto bins = error_histogram(c.frame_errors);
      for (int b = 0; b < kHistogramBins; ++b) {
        hist << s.scenario << "," << c.name << ","
             << format_double(static_cast<double>(b) / kHistogramBins) << ","
             << format_double(static_cast<double>(b + 1) / kHistogramBins) << ","
             << bins[b] << "\n";
      }
    }
  }
  write_text(dir + "/summary.csv", summary.str());
  write_text(dir + "/histograms.csv", hist.str());
}

void write_identification_outputs(const IdentificationReport& report,
                                  const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir + "/report.json", identification_report_json(report));

  std::ostringstream summary;
  summary << "r,case,frames,correct,identification_rate\n";
  for (std::size_t k = 0; k < report.r_values.size(); ++k) {
    for (const auto& c : report.cases) {
      const long correct =
          std::lround(c.rates[k] * static_cast<double>(report.frames_per_case));
      summary << format_double(report.r_values[k]) << "," << c.name << ","
              << report.frames_per_case << "," << correct << ","
              << format_double(c.rates[k]) << "\n";
    }
  }
  write_text(dir + "/summary.csv", summary.str());

  // Level-n pairwise error distributions per case.
  std::ostringstream hist;
  hist << "case,pair,bin_lo,bin_hi,count\n";
  const int n = report.camera_count;
  for (const auto& c : report.cases) {
    std::size_t idx = 0;
    for (int i = 0; i + 1 < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        std::vector<double> errors;
        errors.reserve(c.frame_level_errors.size());
        for (const auto& frame : c.frame_level_errors) errors.push_back(frame[0][idx]);
        const auto bins = error_histogram(errors);
        const std::string pair = "E_" + std::to_string(i) + "_" + std::to_string(j) +
                                 "_" + std::to_string(n);
        for (int b = 0; b < kHistogramBins; ++b) {
          hist << c.name << "," << pair << ","
               << format_double(static_cast<double>(b) / kHistogramBins) << ","
               << format_double(static_cast<double>(b + 1) / kHistogramBins) << ","
               << bins[b] << "\n";
        }
        ++idx;
      }
    }
  }
  write_text(dir + "/histograms.csv", hist.str());
}

void write_sweep_outputs(const SweepReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir + "/report.json", sweep_report_json(report));
  std::ostringstream csv;
  csv << "axis,value,radius,theta,frames,detections,detection_rate\n";
  for (const auto& p : report.points) {
    const long detections =
        std::lround(p.detection_rate * static_cast<double>(report.frames_per_point));
    csv << report.axis << "," << format_double(p.value) << "," << format_double(p.radius)
        << "," << format_double(report.theta) << "," << report.frames_per_point << ","
        << detections << "," << format_double(p.detection_rate) << "\n";
  }
  write_text(dir + "/sweep.csv", csv.str());
}

// ---------------------------------------------------------------------------
// Report verification

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ContractError("report inconsistency: " + what);
}

std::string verify_detection(const json& root) {
  DetectionReport report;
  report.seed = root.at("seed").get<std::uint64_t>();
  report.r_config = root.at("r_config").get<double>();
  report.frames_per_case = root.at("frames_per_case").get<int>();
  report.r_values = root.at("r_values").get<std::vector<double>>();
  for (const auto& js : root.at("scenarios")) {
    DetectionScenarioResult s;
    s.scenario = js.at("scenario").get<int>();
    s.thetas = js.at("thetas").get<std::vector<double>>();
    require(s.thetas.size() == report.r_values.size(), "thetas/r_values length");
    for (const auto& jc : js.at("cases")) {
      DetectionCaseResult c;
      c.name = jc.at("name").get<std::string>();
      c.attacked = jc.at("attacked").get<std::vector<int>>();
      c.frame_errors = jc.at("frame_errors").get<std::vector<double>>();
      c.rates = jc.at("rates").get<std::vector<double>>();
      require(static_cast<int>(c.frame_errors.size()) == report.frames_per_case,
              "frame count for case " + c.name);
      require(c.rates.size() == report.r_values.size(), "rates length for " + c.name);
      for (std::size_t k = 0; k < s.thetas.size(); ++k) {
        require(c.rates[k] == rate_above(c.frame_errors, s.thetas[k]),
                "rate recomputation for " + c.name);
      }
      const auto bins = error_histogram(c.frame_errors);
      require(jc.at("histogram").get<std::vector<long>>() == bins,
              "histogram recomputation for " + c.name);
      s.cases.push_back(std::move(c));
    }
    report.scenarios.push_back(std::move(s));
  }
  return detection_summary(report);
}

std::string verify_identification(const json& root) {
  IdentificationReport report;
  report.seed = root.at("seed").get<std::uint64_t>();
  report.r_config = root.at("r_config").get<double>();
  report.frames_per_case = root.at("frames_per_case").get<int>();
  report.camera_count = root.at("camera_count").get<int>();
  report.r_values = root.at("r_values").get<std::vector<double>>();

  std::vector<ThresholdSet> sets;
  for (const auto& list : root.at("thresholds_by_r")) {
    ThresholdSet set;
    std::map<std::array<int, 3>, double> thetas;
    for (const auto& entry : list) {
      const auto triple = triple_from_json(entry);
      const double theta = entry.at("theta").get<double>();
      set.entries[triple] = ThresholdEntry{theta, 0.0, 0.0, 0};
      thetas[triple] = theta;
    }
    sets.push_back(std::move(set));
    report.thresholds_by_r.push_back(std::move(thetas));
  }
  require(sets.size() == report.r_values.size(), "thresholds_by_r/r_values length");

  for (const auto& jc : root.at("cases")) {
    IdentificationCaseResult c;
    c.name = jc.at("name").get<std::string>();
    c.attacked = jc.at("attacked").get<std::vector<int>>();
    c.frame_level_errors =
        jc.at("frame_level_errors").get<std::vector<std::vector<std::vector<double>>>>();
    c.rates = jc.at("rates").get<std::vector<double>>();
    require(static_cast<int>(c.frame_level_errors.size()) == report.frames_per_case,
            "frame count for case " + c.name);
    require(c.rates.size() == report.r_values.size(), "rates length for " + c.name);
    const auto& results = jc.at("frame_results");
    require(static_cast<int>(results.size()) == report.frames_per_case,
            "frame results for case " + c.name);
    for (std::size_t k = 0; k < report.r_values.size(); ++k) {
      long correct = 0;
      for (const auto& levels : c.frame_level_errors) {
        const auto result = identify_from_levels(levels, report.camera_count, sets[k]);
        correct += result.attacked == c.attacked;
      }
      require(c.rates[k] ==
                  static_cast<double>(correct) / static_cast<double>(report.frames_per_case),
              "rate recomputation for " + c.name);
    }
    report.cases.push_back(std::move(c));
  }
  return identification_summary(report);
}

std::string verify_sweep(const json& root) {
  SweepReport report;
  report.seed = root.at("seed").get<std::uint64_t>();
  report.axis = root.at("axis").get<std::string>();
  report.r = root.at("r").get<double>();
  report.theta = root.at("theta").get<double>();
  report.frames_per_point = root.at("frames_per_point").get<int>();
  for (const auto& jp : root.at("points")) {
    SweepPoint p;
    p.value = jp.at("value").get<double>();
    p.radius = jp.at("radius").get<double>();
    p.frame_errors = jp.at("frame_errors").get<std::vector<double>>();
    p.detection_rate = jp.at("detection_rate").get<double>();
    require(static_cast<int>(p.frame_errors.size()) == report.frames_per_point,
            "frame count for grid value " + format_double(p.value));
    require(p.detection_rate == rate_above(p.frame_errors, report.theta),
            "rate recomputation for grid value " + format_double(p.value));
    report.points.push_back(std::move(p));
  }
  return sweep_summary(report);
}

}  // namespace

std::string verify_report_file(const std::string& path) {
  const json root = load_json_file(path);
  try {
    if (root.at("format").get<std::string>() != "oad-report-v1")
      throw ConfigError("unrecognized report format");
    const auto experiment = root.at("experiment").get<std::string>();
    if (experiment == "detection") return verify_detection(root);
    if (experiment == "identification") return verify_identification(root);
    if (experiment == "sweep") return verify_sweep(root);
    throw ConfigError("unknown experiment kind: " + experiment);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace oad
