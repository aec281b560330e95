#include <nsgeo/pipeline.hpp>

#include <nsgeo/simulation.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace nsgeo;
namespace fs = std::filesystem;
namespace ts = testsupport;

TEST_SUITE("pipeline") {

TEST_CASE("fit_baseline recovers an isotropic exponential structure") {
  std::mt19937_64 eng(20240827);
  const std::vector<Point> pts = ts::scatter(eng, 220, 0.0, 12.0);
  NsModel truth;
  truth.family = ExponentialFamily{1.0};
  truth.mean = constant_field(5.0);
  truth.sigma = constant_field(1.5);
  truth.anisotropy = constant_field(AnisotropyParams(1.5, 1.5, 0.0));
  const Dataset data(pts, unconditional_simulate(truth, pts, 91, {0, true}));

  BaselineConfig config;
  const StationaryBaseline fit = fit_baseline(data, config);
  CHECK(fit.total_sill() == doctest::Approx(2.25).epsilon(0.5));
  CHECK(fit.mean == doctest::Approx(5.0).epsilon(0.15));
  REQUIRE(fit.structures.size() == 2);
  const auto& expo = std::get<StationaryStructure>(fit.structures[1]);
  CHECK(expo.ranges.lambda1 == doctest::Approx(1.5).epsilon(0.75));
}

TEST_CASE("covariance_contours: isotropic constant model gives circular levels") {
  NsModel model;
  model.family = ExponentialFamily{1.0};
  model.sigma = constant_field(2.0);
  model.anisotropy = constant_field(AnisotropyParams(1.0, 1.0, 0.0));
  const auto sets = covariance_contours(model, {{0.0, 0.0}}, {0.5}, false, 101);
  REQUIRE(sets.size() == 1);
  CHECK(sets[0].level == doctest::Approx(2.0));  // 0.5 * sigma^2
  REQUIRE(!sets[0].polylines.empty());
  // C(0, u) = 4 exp(-|u|) = 2  =>  |u| = log 2.
  for (const auto& line : sets[0].polylines)
    for (const Point& v : line.vertices)
      CHECK(norm(v) == doctest::Approx(std::log(2.0)).epsilon(0.02));
}

TEST_CASE("end-to-end on a stationary synthetic field") {
  // Stationary truth: the smoothed parameter maps should be near constant and
  // the non-stationary model should score comparably to the baseline.
  std::mt19937_64 eng(20240828);
  const std::vector<Point> train_pts = ts::scatter(eng, 170, 0.0, 10.0);
  const std::vector<Point> hold_pts = ts::scatter(eng, 60, 0.5, 9.5);

  NsModel truth;
  truth.family = ExponentialFamily{1.0};
  truth.mean = constant_field(4.0);
  truth.sigma = constant_field(1.2);
  truth.anisotropy = constant_field(AnisotropyParams(1.8, 1.8, 0.0));

  std::vector<Point> all_pts = train_pts;
  all_pts.insert(all_pts.end(), hold_pts.begin(), hold_pts.end());
  const std::vector<double> all_vals = unconditional_simulate(truth, all_pts, 2024, {0, true});
  const Dataset train(train_pts,
                      std::vector<double>(all_vals.begin(),
                                          all_vals.begin() + static_cast<long>(train_pts.size())));
  const Dataset hold(hold_pts,
                     std::vector<double>(all_vals.begin() + static_cast<long>(train_pts.size()),
                                         all_vals.end()));

  const fs::path dir = fs::temp_directory_path() / "nsgeo_pipeline_test";
  fs::remove_all(dir);
  write_dataset(dir.string() + "_train.tsv", train);  // outside dir: inputs
  write_dataset(dir.string() + "_hold.tsv", hold);

  RunConfig config;
  config.input = dir.string() + "_train.tsv";
  config.holdout = dir.string() + "_hold.tsv";
  config.outdir = dir;
  config.epsilon_grid = {3.0};
  config.delta_grid = {1.0, 2.0, 4.0};
  config.anchor_nx = 5;
  config.anchor_ny = 5;
  config.grid_nx = 12;
  config.grid_ny = 12;
  config.n_realizations = 2;
  config.gibbs_sweeps = 40;
  config.contour_points = {{5.0, 5.0}};
  config.seed = 31415;

  const PipelineResult result = run_pipeline(config);
  CHECK(result.epsilon == 3.0);

  for (const char* name :
       {"anchors.tsv", "ellipses.tsv", "params_mean.grid", "params_variance.grid",
        "params_aniso_ratio.grid", "params_azimuth.grid", "pred.grid", "pred_sd.grid",
        "baseline_pred.grid", "baseline_sd.grid", "sim_1.grid", "sim_2.grid", "scores.tsv",
        "contours.tsv", "cv_delta.tsv"})
    CHECK(fs::exists(dir / name));

  // Near-constant smoothed maps under a stationary truth.
  const GridData mean_map = read_grid(dir / "params_mean.grid");
  double mean_lo = mean_map.values[0], mean_hi = mean_map.values[0];
  for (double v : mean_map.values) {
    mean_lo = std::min(mean_lo, v);
    mean_hi = std::max(mean_hi, v);
  }
  CHECK(mean_hi - mean_lo < 2.0);
  CHECK(mean_lo > 2.0);
  CHECK(mean_hi < 6.0);

  const GridData ratio_map = read_grid(dir / "params_aniso_ratio.grid");
  for (double v : ratio_map.values) CHECK(v < 3.0);

  // Comparable scores between the two models on a stationary field.
  std::ifstream scores(dir / "scores.tsv");
  std::string line;
  std::getline(scores, line);  // header
  std::getline(scores, line);  // mae row
  std::istringstream ss(line);
  std::string label;
  double mae_stat = 0.0, mae_ns = 0.0;
  ss >> label >> mae_stat >> mae_ns;
  CHECK(label == "mae");
  CHECK(mae_ns < 2.0 * mae_stat + 0.5);
  CHECK(mae_stat < 2.0 * mae_ns + 0.5);

  // Determinism: rerunning with the same seed reproduces the realization.
  const GridData sim1 = read_grid(dir / "sim_1.grid");
  const PipelineResult again = run_pipeline(config);
  (void)again;
  const GridData sim1_again = read_grid(dir / "sim_1.grid");
  for (std::size_t i = 0; i < sim1.values.size(); ++i)
    CHECK(sim1.values[i] == sim1_again.values[i]);
}

TEST_CASE("pipeline failures carry stage tags") {
  RunConfig config;
  config.input = "/nonexistent/file.csv";
  config.epsilon_grid = {1.0};
  config.outdir = fs::temp_directory_path() / "nsgeo_stage_test";
  try {
    run_pipeline(config);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "load");
    CHECK(std::string(e.what()).find("[load]") != std::string::npos);
  }

  RunConfig no_eps;
  no_eps.input = "whatever";
  try {
    run_pipeline(no_eps);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "config");
  }
}

}  // TEST_SUITE
