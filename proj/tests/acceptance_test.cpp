// Acceptance suite: one test case per release criterion, each printing a
// PASS/FAIL line. Runs the full-size default rig, so this is the slow suite.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "oad/attacks.hpp"
#include "oad/detection.hpp"
#include "oad/geometry.hpp"
#include "oad/harness.hpp"
#include "oad/identification.hpp"
#include "oad/io.hpp"
#include "oad/rng.hpp"

using namespace oad;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool criterion(int number, const std::string& description, bool pass) {
  std::printf("criterion %d: %s — %s\n", number, pass ? "PASS" : "FAIL",
              description.c_str());
  std::fflush(stdout);
  return pass;
}

// Shared full-size runs: one calibration (1000 no-attack frames per pipeline)
// reused by criteria 2-5.
struct Shared {
  ExperimentConfig config;
  Calibration cal;
};

const Shared& shared() {
  static const Shared s = [] {
    Shared sh;
    sh.config = default_config();
    sh.config.calibration_frames = 1000;
    sh.config.frames = 500;
    std::fprintf(stderr, "[acceptance] calibrating (1000 frames per pipeline)...\n");
    sh.cal = calibrate(sh.config);
    return sh;
  }();
  return s;
}

// Central 95% acceptance region of Binomial(n, p) by equal-tail quantiles.
std::pair<long, long> binomial_region(long n, double p) {
  std::vector<double> pmf(n + 1);
  const double lg_n = std::lgamma(static_cast<double>(n) + 1.0);
  for (long k = 0; k <= n; ++k) {
    const double lp = lg_n - std::lgamma(static_cast<double>(k) + 1.0) -
                      std::lgamma(static_cast<double>(n - k) + 1.0) +
                      k * std::log(p) + (n - k) * std::log1p(-p);
    pmf[k] = std::exp(lp);
  }
  double cdf = 0.0;
  long lo = 0;
  long hi = n;
  bool lo_set = false;
  for (long k = 0; k <= n; ++k) {
    cdf += pmf[k];
    if (!lo_set && cdf >= 0.025) {
      lo = k;
      lo_set = true;
    }
    if (cdf >= 0.975) {
      hi = k;
      break;
    }
  }
  return {lo, hi};
}

// Exceedance probability induced by the calibrated order statistic for a
// continuous error distribution: P(new sample > k-th smallest of M).
double order_statistic_rate(int m, double r) {
  auto k = static_cast<long>(std::ceil((1.0 - r) * m - 1e-9));
  k = std::clamp<long>(k, 1, m);
  return static_cast<double>(m + 1 - k) / static_cast<double>(m + 1);
}

}  // namespace

TEST_CASE("criterion 1: exhaustive noiseless identification") {
  const auto start = std::chrono::steady_clock::now();
  bool all_exact = true;
  long cases = 0;
  for (int n = 3; n <= 6; ++n) {
    const int sensors = n + 1;
    for (std::uint32_t mask = 0; mask < (1u << sensors); ++mask) {
      SensorStateVector truth(sensors);
      for (int i = 0; i < sensors; ++i) truth.set_attacked(i, (mask >> i) & 1u);
      if (static_cast<int>(truth.attacked_indices().size()) > n - 2) continue;
      ++cases;
      const auto provider = [&truth](int reference) {
        SensorStateVector level(reference + 1);
        for (int i = 0; i <= reference; ++i) level.set_attacked(i, truth.attacked(i));
        return expected_error_vector(level);
      };
      const auto result = identify(n, provider);
      all_exact = all_exact && result.attacked == truth.attacked_indices();
    }
  }
  const double elapsed = seconds_since(start);
  char desc[160];
  std::snprintf(desc, sizeof(desc),
                "recursive inference exact on all %ld states for n=3..6 (%.2f s)",
                cases, elapsed);
  CHECK(criterion(1, desc, all_exact && elapsed < 10.0));
}

TEST_CASE("criterion 2: calibration consistency across the r grid") {
  const auto& sh = shared();
  const int eval_frames = 1000;
  const int m = sh.config.calibration_frames;

  std::fprintf(stderr, "[acceptance] sampling %d fresh no-attack frames per scenario...\n",
               eval_frames);
  const auto errors_s1 =
      sample_no_attack_errors(sh.config, Pipeline::kScenario1, eval_frames, 0xe7a1);
  const auto errors_s2 =
      sample_no_attack_errors(sh.config, Pipeline::kScenario2, eval_frames, 0xe7a2);

  bool all_within = true;
  for (const double r : r_sweep_grid()) {
    const double p_star = order_statistic_rate(m, r);
    const auto [lo, hi] = binomial_region(eval_frames, p_star);
    for (const auto* errors : {&errors_s1, &errors_s2}) {
      const Pipeline pipeline =
          errors == &errors_s1 ? Pipeline::kScenario1 : Pipeline::kScenario2;
      const double theta = sh.cal.thresholds(pipeline, r).theta(0, 1, 2);
      long alarms = 0;
      for (const double e : *errors) alarms += e > theta;
      const bool within = alarms >= lo && alarms <= hi;
      if (!within) {
        std::fprintf(stderr,
                     "[acceptance]   r=%.2f %s: %ld alarms outside [%ld, %ld]\n", r,
                     pipeline_name(pipeline), alarms, lo, hi);
      }
      all_within = all_within && within;
    }
  }
  CHECK(criterion(2,
                  "fresh no-attack alarm rate inside the 95% binomial region "
                  "for r in {0,1,2,3,5}%, both scenarios",
                  all_within));
}

TEST_CASE("criterion 3: paper-scale attack detection at r <= 5%") {
  const auto& sh = shared();
  const auto start = std::chrono::steady_clock::now();
  std::fprintf(stderr, "[acceptance] detection experiment (2 scenarios x 8 cases x %d frames)...\n",
               sh.config.frames);
  const auto report = run_detection_experiment(sh.config, sh.cal, 0);
  const double elapsed = seconds_since(start);

  const auto it = std::find(report.r_values.begin(), report.r_values.end(), 0.05);
  REQUIRE(it != report.r_values.end());
  const auto k = static_cast<std::size_t>(it - report.r_values.begin());

  double min_rate = 1.0;
  for (const auto& s : report.scenarios) {
    for (const auto& c : s.cases) {
      if (c.attacked.empty()) continue;
      min_rate = std::min(min_rate, c.rates[k]);
      if (c.rates[k] < 0.99) {
        std::fprintf(stderr, "[acceptance]   scenario %d case %s: %.4f\n", s.scenario,
                     c.name.c_str(), c.rates[k]);
      }
    }
  }
  char desc[160];
  std::snprintf(desc, sizeof(desc),
                "all 7 attack cases per scenario detected at >= 99%% (min %.4f) "
                "in %.0f s",
                min_rate, elapsed);
  CHECK(criterion(3, desc, min_rate >= 0.99));
}

TEST_CASE("criterion 4: noisy identification accuracy at r = 1%") {
  const auto& sh = shared();
  std::fprintf(stderr, "[acceptance] identification experiment (5 cases x %d frames)...\n",
               sh.config.frames);
  const auto report = run_identification_experiment(sh.config, sh.cal);

  const auto& grid = r_sweep_grid();
  REQUIRE(report.r_values == grid);

  const auto r1 = static_cast<std::size_t>(
      std::find(grid.begin(), grid.end(), 0.01) - grid.begin());

  double min_rate = 1.0;
  double sum = 0.0;
  int attack_cases = 0;
  std::vector<double> averages(grid.size(), 0.0);
  for (const auto& c : report.cases) {
    if (c.attacked.empty()) continue;
    ++attack_cases;
    min_rate = std::min(min_rate, c.rates[r1]);
    sum += c.rates[r1];
    for (std::size_t k = 0; k < grid.size(); ++k) averages[k] += c.rates[k];
  }
  for (auto& a : averages) a /= attack_cases;
  const double average = sum / attack_cases;

  double best_low = 0.0;
  double best_high = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] <= 0.02) best_low = std::max(best_low, averages[k]);
    else best_high = std::max(best_high, averages[k]);
  }

  for (const auto& c : report.cases) {
    std::fprintf(stderr, "[acceptance]   case %s: rate@1%% = %.4f\n", c.name.c_str(),
                 c.attacked.empty() ? c.rates[r1] : c.rates[r1]);
  }

  char desc[200];
  std::snprintf(desc, sizeof(desc),
                "single-sensor attacks identified (min %.4f >= 0.90, avg %.4f >= 0.95); "
                "swept-r argmax at r <= 2%%",
                min_rate, average);
  CHECK(criterion(4, desc,
                  min_rate >= 0.90 && average >= 0.95 && best_low >= best_high));
}

TEST_CASE("criterion 5: sensitivity sweeps are monotone and saturate") {
  const auto& sh = shared();
  std::fprintf(stderr, "[acceptance] sensitivity sweeps (11 grid points x %d frames)...\n",
               sh.config.sweep.frames);
  const auto spoof = run_sensitivity_sweep(sh.config, sh.cal, SweepAxis::kSpoofWidth);
  const auto facula =
      run_sensitivity_sweep(sh.config, sh.cal, SweepAxis::kFaculaCoverage);

  bool monotone = true;
  for (const auto* sweep : {&spoof, &facula}) {
    for (std::size_t i = 1; i < sweep->points.size(); ++i) {
      if (sweep->points[i].detection_rate <
          sweep->points[i - 1].detection_rate - 0.01 - 1e-12) {
        monotone = false;
        std::fprintf(stderr, "[acceptance]   %s inversion at %.2f: %.4f -> %.4f\n",
                     sweep->axis.c_str(), sweep->points[i].value,
                     sweep->points[i - 1].detection_rate,
                     sweep->points[i].detection_rate);
      }
    }
    std::fprintf(stderr, "[acceptance]   %s rates:", sweep->axis.c_str());
    for (const auto& p : sweep->points) std::fprintf(stderr, " %.3f", p.detection_rate);
    std::fprintf(stderr, "\n");
  }
  const double top_spoof = spoof.points.back().detection_rate;
  const double top_facula = facula.points.back().detection_rate;

  char desc[200];
  std::snprintf(desc, sizeof(desc),
                "detection nondecreasing along both axes (<= 1pp slack); top points "
                "%.4f / %.4f >= 0.99",
                top_spoof, top_facula);
  CHECK(criterion(5, desc, monotone && top_spoof >= 0.99 && top_facula >= 0.99));
}

TEST_CASE("criterion 6: unit fidelity of the core formulas") {
  bool roundtrip_ok = true;
  Rng rng(1234);
  for (int i = 0; i < 10000; ++i) {
    const double d = rng.uniform(1e-3, 400.0);
    const double f = rng.uniform(50.0, 2000.0);
    const double b = rng.uniform(0.01, 2.0);
    const double back = depth_to_disparity(disparity_to_depth(d, f, b), f, b);
    roundtrip_ok = roundtrip_ok && std::abs(back - d) <= 1e-9 * d;
  }

  const bool boundary_ok = pixel_inconsistent(10.0, 14.0) &&
                           !pixel_inconsistent(100.0, 103.0) &&
                           !pixel_inconsistent(100.0, 104.0);

  const auto mask = make_facula(1242, 375, 187.5, PixelCoord{621.0, 187.5}, 0);
  const double coverage_pct = 100.0 * mask.coverage_fraction();
  const bool coverage_ok = std::abs(coverage_pct - 23.71) <= 0.05;

  char desc[160];
  std::snprintf(desc, sizeof(desc),
                "conversion roundtrip <= 1e-9 rel; consistency boundaries exact; "
                "facula coverage %.4f%% within 23.71 +/- 0.05",
                coverage_pct);
  CHECK(criterion(6, desc, roundtrip_ok && boundary_ok && coverage_ok));
}

TEST_CASE("criterion 7: determinism and serialization") {
  auto cfg = default_config();
  cfg.frames = 40;
  cfg.calibration_frames = 120;
  std::fprintf(stderr, "[acceptance] determinism check (40-frame reruns)...\n");
  const auto cal_a = calibrate(cfg);
  const auto cal_b = calibrate(cfg);
  const bool cal_same = cal_a.samples == cal_b.samples;

  const auto det_a = run_detection_experiment(cfg, cal_a, 1);
  const auto det_b = run_detection_experiment(cfg, cal_b, 1);
  const bool detection_same =
      detection_report_json(det_a) == detection_report_json(det_b);

  auto ident_cfg = cfg;
  ident_cfg.frames = 8;
  const auto id_a = run_identification_experiment(ident_cfg, cal_a);
  const auto id_b = run_identification_experiment(ident_cfg, cal_b);
  const bool ident_same =
      identification_report_json(id_a) == identification_report_json(id_b);

  // File roundtrips, bit for bit.
  const auto dir = std::filesystem::temp_directory_path() / "oad_acceptance_io";
  std::filesystem::create_directories(dir);
  Rng rng(9);
  PointCloud cloud;
  for (int i = 0; i < 5000; ++i) {
    cloud.points.push_back(LidarPoint{static_cast<float>(rng.uniform(-40, 40)),
                                      static_cast<float>(rng.uniform(-3, 3)),
                                      static_cast<float>(rng.uniform(0.6, 80)),
                                      static_cast<float>(rng.uniform01())});
  }
  const auto cloud_path = (dir / "cloud.bin").string();
  save_point_cloud(cloud, cloud_path);
  const auto cloud_back = load_point_cloud(cloud_path);
  bool cloud_ok = cloud_back.size() == cloud.size();
  for (std::size_t i = 0; cloud_ok && i < cloud.size(); ++i) {
    cloud_ok = std::memcmp(&cloud_back.points[i], &cloud.points[i],
                           sizeof(LidarPoint)) == 0;
  }

  auto map = DisparityMap::constant(300, 120, 0.0f);
  for (int y = 0; y < 120; ++y) {
    for (int x = 0; x < 300; ++x) {
      if (rng.uniform01() < 0.2) map.invalidate(x, y);
      else map.set(x, y, static_cast<float>(rng.uniform(0.0, 192.0)));
    }
  }
  const auto map_path = (dir / "map.pfm").string();
  save_disparity_map(map, map_path);
  const auto map_back = load_disparity_map(map_path);
  bool map_ok = map_back.valid == map.valid;
  for (std::size_t i = 0; map_ok && i < map.values.size(); ++i) {
    if (map.valid[i]) map_ok = map_back.values[i] == map.values[i];
  }
  std::filesystem::remove_all(dir);

  CHECK(criterion(7,
                  "reruns byte-identical (calibration, detection, identification); "
                  "point-cloud and disparity files roundtrip bit-exactly",
                  cal_same && detection_same && ident_same && cloud_ok && map_ok));
}
