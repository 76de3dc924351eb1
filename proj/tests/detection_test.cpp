#include <doctest.h>

#include <vector>

#include "oad/detection.hpp"
#include "oad/errors.hpp"
#include "oad/rng.hpp"
#include "oad/scene.hpp"

using namespace oad;

namespace {

CameraModel camera(double baseline_position, int id, int w = 320, int h = 96) {
  CameraModel cam;
  cam.id = id;
  cam.focal_length = 700.0;
  cam.baseline_position = baseline_position;
  cam.image_width = w;
  cam.image_height = h;
  cam.principal_point = {w / 2.0, h / 2.0};
  return cam;
}

}  // namespace

TEST_CASE("pixel consistency test boundary triples") {
  CHECK(pixel_inconsistent(10.0, 14.0));        // both conditions hold
  CHECK_FALSE(pixel_inconsistent(100.0, 103.0));  // |diff| = 3, not > 3
  CHECK_FALSE(pixel_inconsistent(100.0, 104.0));  // ratio 0.04 <= 0.05
  CHECK(pixel_inconsistent(100.0, 106.0));
}

TEST_CASE("pixel consistency test is symmetric") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(0.0, 200.0);
    const double b = rng.uniform(0.0, 200.0);
    CHECK(pixel_inconsistent(a, b) == pixel_inconsistent(b, a));
  }
}

TEST_CASE("zero disparities never mask a gross difference") {
  CHECK(pixel_inconsistent(0.0, 4.0));
  CHECK_FALSE(pixel_inconsistent(0.0, 2.0));  // first condition fails
  CHECK_FALSE(pixel_inconsistent(0.0, 0.0));
}

TEST_CASE("disparity error on identical maps is zero") {
  const auto map = DisparityMap::constant(16, 8, 12.0f);
  const auto e = disparity_error(map, map);
  CHECK(e.value == 0.0);
  CHECK(e.valid_count == 128);
}

TEST_CASE("globally shifted map fails everywhere") {
  const auto a = DisparityMap::constant(16, 8, 12.0f);
  const auto b = DisparityMap::constant(16, 8, 112.0f);
  const auto e = disparity_error(a, b);
  CHECK(e.value == 1.0);
}

TEST_CASE("disparity error counts only the common valid pixels") {
  auto a = DisparityMap::constant(10, 1, 20.0f);
  auto b = DisparityMap::constant(10, 1, 20.0f);
  // 3 inconsistent among 10 common-valid pixels.
  b.values[0] = 120.0f;
  b.values[1] = 120.0f;
  b.values[2] = 120.0f;
  const auto e = disparity_error(a, b);
  CHECK(e.value == doctest::Approx(0.3));

  // Pixels valid on one side only are ignored.
  a.invalidate(9, 0);
  b.values[9] = 150.0f;
  const auto e2 = disparity_error(a, b);
  CHECK(e2.valid_count == 9);
  CHECK(e2.value == doctest::Approx(3.0 / 9.0));
}

TEST_CASE("disparity error is symmetric in its arguments") {
  auto a = DisparityMap::constant(32, 8, 15.0f);
  auto b = a;
  Rng rng(5);
  for (auto& v : b.values) v += static_cast<float>(rng.normal(4.0));
  const auto ab = disparity_error(a, b);
  const auto ba = disparity_error(b, a);
  CHECK(ab.value == ba.value);
  CHECK(ab.inconsistent_count == ba.inconsistent_count);
}

TEST_CASE("disparity error rejects mismatched or disjoint maps") {
  const auto a = DisparityMap::constant(8, 8, 1.0f);
  const auto b = DisparityMap::constant(9, 8, 1.0f);
  CHECK_THROWS_AS(disparity_error(a, b), ContractError);

  auto c = DisparityMap::all_invalid(8, 8);
  auto d = DisparityMap::constant(8, 8, 1.0f);
  CHECK_THROWS_AS(disparity_error(c, d), ContractError);
}

TEST_CASE("common rescaling by 1 preserves the error; other factors may not") {
  auto a = DisparityMap::constant(4, 1, 30.0f);
  auto b = DisparityMap::constant(4, 1, 32.5f);  // diff 2.5: consistent
  const auto e = disparity_error(a, b);
  CHECK(e.value == 0.0);
  const auto e_same = disparity_error(rescale_disparity(a, 0.5, 0.5),
                                      rescale_disparity(b, 0.5, 0.5));
  CHECK(e_same.value == e.value);
  // Doubling both maps pushes |diff| to 5 px while the ratio is unchanged,
  // so the absolute-difference condition now fires: not scale invariant.
  const auto e_double = disparity_error(rescale_disparity(a, 0.5, 1.0),
                                        rescale_disparity(b, 0.5, 1.0));
  CHECK(e_double.value == 1.0);
}

TEST_CASE("threshold calibration picks the order statistic") {
  std::vector<double> samples;
  for (int i = 1; i <= 10; ++i) samples.push_back(i / 100.0);
  CHECK(calibrate_threshold(samples, 0.1) == doctest::Approx(0.09));
  CHECK(calibrate_threshold(samples, 0.0) == doctest::Approx(0.10));
  CHECK(calibrate_threshold(samples, 1.0) == doctest::Approx(0.01));

  const std::vector<double> constant(25, 0.042);
  for (const double r : {0.0, 0.01, 0.2, 0.9}) {
    CHECK(calibrate_threshold(constant, r) == doctest::Approx(0.042));
  }
}

TEST_CASE("at most an r-fraction of calibration samples exceeds the threshold") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> samples;
    const int m = static_cast<int>(rng.uniform_int(1, 400));
    for (int i = 0; i < m; ++i) samples.push_back(rng.uniform01());
    const double r = rng.uniform(0.0, 0.3);
    const double theta = calibrate_threshold(samples, r);
    long above = 0;
    double max_inlier = -1.0;
    for (const double s : samples) {
      if (s > theta) ++above;
      else max_inlier = std::max(max_inlier, s);
    }
    CHECK(static_cast<double>(above) <= r * m + 1e-9);
    // Removing the outliers makes the largest inlier exactly theta.
    CHECK(max_inlier == theta);
  }
}

TEST_CASE("threshold calibration rejects bad input") {
  CHECK_THROWS_AS(calibrate_threshold({}, 0.1), DomainError);
  const std::vector<double> s{0.1};
  CHECK_THROWS_AS(calibrate_threshold(s, -0.1), DomainError);
  CHECK_THROWS_AS(calibrate_threshold(s, 1.5), DomainError);
}

TEST_CASE("detect uses a strict inequality") {
  DisparityError e;
  e.value = 0.25;
  CHECK_FALSE(detect(e, 0.25));
  CHECK(detect(e, 0.25 - 1e-12));
  CHECK_FALSE(detect(e, 0.26));
}

TEST_CASE("threshold set lookup") {
  ThresholdSet set;
  set.r = 0.01;
  set.entries[{0, 1, 2}] = ThresholdEntry{0.05, 0.0, 0.06, 100};
  CHECK(set.theta(0, 1, 2) == doctest::Approx(0.05));
  CHECK(set.has(0, 1, 2));
  CHECK_FALSE(set.has(0, 1, 3));
  CHECK_THROWS_AS(set.theta(0, 1, 3), ContractError);
}

TEST_CASE("scenario 1 with exact sensors reports zero error and no attack") {
  Scene scene;
  scene.ground_height = 1e9;
  scene.background_depth = 25.0;
  const auto s2 = camera(0.54, 2);
  const auto s1 = camera(0.0, 1);
  const auto truth = render_truth_disparity(scene, s2, s1);

  LidarConfig lidar;
  lidar.channels = 12;
  lidar.elevation_min_deg = -6.0;
  lidar.elevation_max_deg = 2.0;
  lidar.azimuth_min_deg = -10.0;
  lidar.azimuth_max_deg = 10.0;
  lidar.azimuth_step_deg = 0.5;
  lidar.range_jitter_sigma = 0.0;
  const auto cloud = sample_lidar(scene, lidar, Vec3{-0.27, -0.3, 0.0}, 2);

  EstimatorNoiseModel noise;
  noise.gaussian_sigma = 0.0;
  noise.outlier_fraction = 0.0;
  const auto out = run_scenario1(cloud, truth, s2, 0.54, noise, {}, 0.05, 3);
  CHECK(out.error.value == 0.0);
  CHECK_FALSE(out.under_attack);
  CHECK(out.error.valid_count > 0);
}

TEST_CASE("scenario 2 with exact sensors reports zero error") {
  Scene scene;
  scene.ground_height = 1e9;
  scene.background_depth = 25.0;
  const auto s2 = camera(0.54, 2);
  const auto s1 = camera(0.27, 1);
  const auto s0 = camera(0.0, 0);
  const auto truth_02 = render_truth_disparity(scene, s2, s0);
  const auto truth_12 = render_truth_disparity(scene, s2, s1);
  EstimatorNoiseModel noise;
  noise.gaussian_sigma = 0.0;
  noise.outlier_fraction = 0.0;
  const auto out = run_scenario2(truth_02, 0.54, truth_12, 0.27, noise, {}, 0.05, 3);
  CHECK(out.error.value == 0.0);
  CHECK_FALSE(out.under_attack);
  CHECK(out.error.valid_count == 320 * 96);
}

TEST_CASE("facula on one camera of the pair raises the scenario-2 error") {
  SceneParams params;
  params.obstacle_count = {2, 2};
  const auto scene = generate_scene(params, 31);
  const auto s2 = camera(0.54, 2);
  const auto s1 = camera(0.27, 1);
  const auto s0 = camera(0.0, 0);
  const auto truth_02 = render_truth_disparity(scene, s2, s0);
  const auto truth_12 = render_truth_disparity(scene, s2, s1);
  EstimatorNoiseModel noise;

  const auto clean = run_scenario2(truth_02, 0.54, truth_12, 0.27, noise, {}, 1.1, 3);

  std::vector<TaggedFacula> attack{
      {1, make_facula(320, 96, 40.0, PixelCoord{160.0, 48.0}, 4)}};
  const auto hit = run_scenario2(truth_02, 0.54, truth_12, 0.27, noise, attack, 1.1, 3);
  CHECK(hit.error.value > clean.error.value + 0.05);
}
