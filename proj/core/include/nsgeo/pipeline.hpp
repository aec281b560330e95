#pragma once

#include <nsgeo/covariance.hpp>
#include <nsgeo/estimation.hpp>
#include <nsgeo/io.hpp>
#include <nsgeo/prediction.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsgeo {

/// Pipeline failures carry the stage they occurred in; the CLI maps stages to
/// exit codes.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// WLS fit of a nested isotropic stationary model (optional nugget plus one or
/// more profile structures) to the Matheron variogram, with the constant mean
/// kriged under the fitted covariance.
struct BaselineConfig {
  bool nugget = true;
  std::vector<StationaryStructure::Profile> profiles = {StationaryStructure::Profile::exponential};
  std::size_t distance_classes = 15;
  std::size_t multistarts = 5;
  std::size_t max_evals = 4000;
  std::uint64_t seed = 1;
};

StationaryBaseline fit_baseline(const Dataset& data, const BaselineConfig& config = {});

/// Covariance level contours around selected points, marched over a local grid.
/// Levels are fractions of the local variance sigma^2(x0) unless absolute.
std::vector<ContourSet> covariance_contours(const NsModel& model, const std::vector<Point>& centers,
                                            const std::vector<double>& levels, bool absolute = false,
                                            std::size_t grid_n = 121);

/// Full run configuration (mirrored by CLI flags and the config file).
struct RunConfig {
  std::filesystem::path input;
  LoadOptions columns;

  std::string family = "exponential";  // exponential | gaussian | matern | cauchy
  double matern_nu = 1.5;
  double cauchy_alpha = 1.0;

  std::vector<double> epsilon_grid;  // single value = fixed bandwidth
  std::vector<double> delta_grid;    // single value = fixed smoothing bandwidth

  std::size_t anchor_nx = 12;
  std::size_t anchor_ny = 12;
  std::size_t n_directions = 4;
  std::size_t distance_classes = 10;
  std::string radius_policy = "sqrt3";  // sqrt3 | quantile | fwhm

  std::size_t grid_nx = 100;
  std::size_t grid_ny = 100;
  std::size_t knn = 0;  // 0: global kriging (up to the policy threshold)

  std::size_t n_realizations = 0;
  std::size_t gibbs_sweeps = 100;

  std::filesystem::path holdout;  // optional validation observations
  bool baseline = true;

  std::vector<Point> contour_points;
  std::vector<double> contour_levels = {0.8, 0.6, 0.4};
  bool contour_absolute = false;

  std::uint64_t seed = 20240801;
  std::filesystem::path outdir = "nsgeo_out";
};

CorrelationFamily make_family(const RunConfig& config);
RadiusPolicy parse_radius_policy(const std::string& name);
EstimationConfig estimation_config(const RunConfig& config);

struct PipelineResult {
  double epsilon = 0.0;
  double delta = 0.0;
  std::vector<std::string> artifacts;
  std::vector<std::string> warnings;
};

/// Orchestrates load -> bandwidth selection -> anchor estimation -> smoothing
/// -> kriging -> optional simulation/validation/contours, writing every
/// artifact under config.outdir. Fully reproducible from config + seed.
PipelineResult run_pipeline(const RunConfig& config);

}  // namespace nsgeo
