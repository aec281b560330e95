// Command-line front end: data ingestion, per-stage subcommands and the full
// pipeline. Every artifact is a delimited text file under --out.

#include <nsgeo/io.hpp>
#include <nsgeo/pipeline.hpp>
#include <nsgeo/prediction.hpp>
#include <nsgeo/rng.hpp>
#include <nsgeo/simulation.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace nsgeo;

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    out.push_back(std::stod(token));
  }
  return out;
}

std::vector<Point> parse_points(const std::string& spec) {
  // "x,y;x,y;..."
  std::vector<Point> out;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ';')) {
    const std::vector<double> xy = parse_doubles(token);
    if (xy.size() != 2) throw CLI::ValidationError("--points", "expected x,y pairs separated by ';'");
    out.push_back({xy[0], xy[1]});
  }
  return out;
}

void parse_dims(const std::string& spec, std::size_t& nx, std::size_t& ny) {
  const auto sep = spec.find('x');
  if (sep == std::string::npos) throw CLI::ValidationError("--grid", "expected NXxNY");
  nx = std::stoul(spec.substr(0, sep));
  ny = std::stoul(spec.substr(sep + 1));
}

int stage_exit_code(const std::string& stage) {
  static const std::map<std::string, int> codes = {
      {"config", 2},   {"load", 3},      {"cv-epsilon", 4}, {"estimate", 5},
      {"cv-delta", 6}, {"smooth", 7},    {"baseline", 8},   {"krige", 9},
      {"simulate", 10}, {"validate", 11}, {"covariance-contours", 12}};
  const auto it = codes.find(stage);
  return it == codes.end() ? 1 : it->second;
}

double default_delta(const std::vector<Point>& anchors) {
  if (anchors.size() < 2) return 1.0;
  std::vector<double> nearest(anchors.size(), 0.0);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < anchors.size(); ++j)
      if (i != j) best = std::min(best, distance(anchors[i], anchors[j]));
    nearest[i] = best;
  }
  std::nth_element(nearest.begin(), nearest.begin() + static_cast<std::ptrdiff_t>(nearest.size() / 2),
                   nearest.end());
  return std::max(nearest[nearest.size() / 2], 1e-12);
}

struct CommonModelFlags {
  std::string family = "exponential";
  double matern_nu = 1.5;
  double cauchy_alpha = 1.0;

  CorrelationFamily make() const {
    RunConfig tmp;
    tmp.family = family;
    tmp.matern_nu = matern_nu;
    tmp.cauchy_alpha = cauchy_alpha;
    return make_family(tmp);
  }
  void attach(CLI::App* cmd) {
    cmd->add_option("--family", family, "Correlation family: exponential|gaussian|matern|cauchy");
    cmd->add_option("--matern-nu", matern_nu, "Matern smoothness (family=matern)");
    cmd->add_option("--cauchy-alpha", cauchy_alpha, "Cauchy exponent (family=cauchy)");
  }
};

struct ColumnFlags {
  LoadOptions columns;
  void attach(CLI::App* cmd) {
    cmd->add_option("--x-col", columns.x_col, "Name of the x coordinate column");
    cmd->add_option("--y-col", columns.y_col, "Name of the y coordinate column");
    cmd->add_option("--value-col", columns.value_col, "Name of the value column");
  }
};

Dataset load_or_die(const fs::path& input, const LoadOptions& columns) {
  const LoadReport report = load_dataset(input, columns);
  for (const auto& w : report.warnings) std::cerr << "[load] warning: " << w << '\n';
  return report.data;
}

NsModel model_from_anchors(const AnchorEstimates& est, double delta,
                           const CorrelationFamily& family) {
  const ParameterField field(est.anchors, est.fits, est.means, delta);
  return field.to_model(family);
}

GridData evaluate_grid(const Grid& grid, const std::function<double(Point)>& f) {
  GridData out(grid, std::vector<double>(grid.size(), 0.0));
  for (std::size_t j = 0; j < grid.ny; ++j)
    for (std::size_t i = 0; i < grid.nx; ++i) out.values[grid.index(i, j)] = f(grid.node(i, j));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-stationary geostatistics: local variogram estimation, kriging and simulation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a key=value config file");

  // ---- run: full pipeline ----------------------------------------------
  RunConfig run_config;
  std::string run_eps_grid, run_delta_grid, run_points, run_levels, run_grid_dims = "100x100";
  CommonModelFlags run_model;
  ColumnFlags run_columns;
  bool run_no_baseline = false;
  auto* run_cmd = app.add_subcommand("run", "Run the full pipeline from a dataset");
  run_cmd->add_option("--input", run_config.input, "Observations file")->required();
  run_columns.attach(run_cmd);
  run_model.attach(run_cmd);
  run_cmd->add_option("--epsilon-grid", run_eps_grid, "Comma-separated bandwidth candidates")
      ->required();
  run_cmd->add_option("--delta-grid", run_delta_grid, "Comma-separated smoothing bandwidths");
  run_cmd->add_option("--anchors-nx", run_config.anchor_nx, "Anchor grid columns");
  run_cmd->add_option("--anchors-ny", run_config.anchor_ny, "Anchor grid rows");
  run_cmd->add_option("--directions", run_config.n_directions, "Azimuth classes (0 = isotropic)");
  run_cmd->add_option("--distance-classes", run_config.distance_classes, "Distance classes");
  run_cmd->add_option("--radius-policy", run_config.radius_policy,
                      "b from epsilon: sqrt3|quantile|fwhm");
  run_cmd->add_option("--grid", run_grid_dims, "Output grid dims NXxNY");
  run_cmd->add_option("--knn", run_config.knn, "k-nearest kriging neighborhood (0 = global)");
  run_cmd->add_option("--simulations", run_config.n_realizations, "Conditional realizations");
  run_cmd->add_option("--sweeps", run_config.gibbs_sweeps, "Gibbs burn-in sweeps");
  run_cmd->add_option("--holdout", run_config.holdout, "Validation observations file");
  run_cmd->add_flag("--no-baseline", run_no_baseline, "Skip the stationary comparator");
  run_cmd->add_option("--points", run_points, "Covariance contour centers 'x,y;x,y'");
  run_cmd->add_option("--levels", run_levels, "Contour levels (fractions of local variance)");
  run_cmd->add_flag("--absolute-levels", run_config.contour_absolute, "Treat levels as absolute");
  run_cmd->add_option("--seed", run_config.seed, "Base seed for all randomized stages");
  run_cmd->add_option("--out", run_config.outdir, "Output directory");

  // ---- shared flags for the stage subcommands ---------------------------
  struct StageFlags {
    fs::path input, anchors_path, out = "nsgeo_out", holdout;
    double epsilon = 0.0, delta = 0.0;
    std::string eps_grid, delta_grid, grid_dims = "100x100", points, levels = "0.8,0.6,0.4";
    std::size_t anchor_nx = 12, anchor_ny = 12, directions = 4, distance_classes = 10;
    std::string radius_policy = "sqrt3";
    std::size_t knn = 0, n_sim = 4, sweeps = 100;
    std::uint64_t seed = 20240801;
    bool baseline = false, no_baseline = false, absolute = false;
    CommonModelFlags model;
    ColumnFlags columns;
  } flags;

  auto* estimate_cmd = app.add_subcommand("estimate", "Fit local parameters at anchor points");
  estimate_cmd->add_option("--input", flags.input, "Observations file")->required();
  estimate_cmd->add_option("--epsilon", flags.epsilon, "Kernel bandwidth")->required();
  estimate_cmd->add_option("--anchors-nx", flags.anchor_nx, "Anchor grid columns");
  estimate_cmd->add_option("--anchors-ny", flags.anchor_ny, "Anchor grid rows");
  estimate_cmd->add_option("--directions", flags.directions, "Azimuth classes (0 = isotropic)");
  estimate_cmd->add_option("--distance-classes", flags.distance_classes, "Distance classes");
  estimate_cmd->add_option("--radius-policy", flags.radius_policy, "sqrt3|quantile|fwhm");
  estimate_cmd->add_option("--seed", flags.seed, "Seed for optimizer multi-starts");
  estimate_cmd->add_option("--out", flags.out, "Output directory");
  flags.model.attach(estimate_cmd);
  flags.columns.attach(estimate_cmd);

  auto* cveps_cmd = app.add_subcommand("cv-epsilon", "Select the kernel bandwidth by leave-one-out");
  cveps_cmd->add_option("--input", flags.input, "Observations file")->required();
  cveps_cmd->add_option("--epsilon-grid", flags.eps_grid, "Comma-separated candidates")->required();
  cveps_cmd->add_option("--delta-grid", flags.delta_grid, "Comma-separated smoothing bandwidths");
  cveps_cmd->add_option("--anchors-nx", flags.anchor_nx, "Anchor grid columns");
  cveps_cmd->add_option("--anchors-ny", flags.anchor_ny, "Anchor grid rows");
  cveps_cmd->add_option("--directions", flags.directions, "Azimuth classes");
  cveps_cmd->add_option("--distance-classes", flags.distance_classes, "Distance classes");
  cveps_cmd->add_option("--radius-policy", flags.radius_policy, "sqrt3|quantile|fwhm");
  cveps_cmd->add_option("--seed", flags.seed, "Seed");
  cveps_cmd->add_option("--out", flags.out, "Output directory");
  flags.model.attach(cveps_cmd);
  flags.columns.attach(cveps_cmd);

  auto* cvdelta_cmd = app.add_subcommand("cv-delta", "Select the smoothing bandwidth");
  cvdelta_cmd->add_option("--anchors", flags.anchors_path, "Anchor table from estimate")->required();
  cvdelta_cmd->add_option("--delta-grid", flags.delta_grid, "Comma-separated candidates")->required();
  cvdelta_cmd->add_option("--out", flags.out, "Output directory");

  auto* smooth_cmd = app.add_subcommand("smooth", "Write smoothed parameter maps");
  smooth_cmd->add_option("--anchors", flags.anchors_path, "Anchor table from estimate")->required();
  smooth_cmd->add_option("--delta", flags.delta, "Smoothing bandwidth (default: anchor spacing)");
  smooth_cmd->add_option("--grid", flags.grid_dims, "Output grid dims NXxNY");
  smooth_cmd->add_option("--out", flags.out, "Output directory");

  auto* krige_cmd = app.add_subcommand("krige", "Kriging predictions and standard deviations");
  krige_cmd->add_option("--input", flags.input, "Observations file")->required();
  krige_cmd->add_option("--anchors", flags.anchors_path, "Anchor table from estimate")->required();
  krige_cmd->add_option("--delta", flags.delta, "Smoothing bandwidth (default: anchor spacing)");
  krige_cmd->add_option("--grid", flags.grid_dims, "Output grid dims NXxNY");
  krige_cmd->add_option("--knn", flags.knn, "k-nearest neighborhood (0 = global)");
  krige_cmd->add_flag("--baseline", flags.baseline, "Also krige the stationary comparator");
  krige_cmd->add_option("--seed", flags.seed, "Seed (baseline fit multi-starts)");
  krige_cmd->add_option("--out", flags.out, "Output directory");
  flags.model.attach(krige_cmd);
  flags.columns.attach(krige_cmd);

  auto* simulate_cmd = app.add_subcommand("simulate", "Conditional simulation on a grid");
  simulate_cmd->add_option("--input", flags.input, "Observations file")->required();
  simulate_cmd->add_option("--anchors", flags.anchors_path, "Anchor table from estimate")->required();
  simulate_cmd->add_option("--delta", flags.delta, "Smoothing bandwidth (default: anchor spacing)");
  simulate_cmd->add_option("--grid", flags.grid_dims, "Output grid dims NXxNY");
  simulate_cmd->add_option("--n", flags.n_sim, "Number of realizations");
  simulate_cmd->add_option("--sweeps", flags.sweeps, "Gibbs burn-in sweeps");
  simulate_cmd->add_option("--seed", flags.seed, "Base seed");
  simulate_cmd->add_option("--out", flags.out, "Output directory");
  flags.model.attach(simulate_cmd);
  flags.columns.attach(simulate_cmd);

  auto* validate_cmd = app.add_subcommand("validate", "Score predictions on held-out observations");
  validate_cmd->add_option("--input", flags.input, "Training observations")->required();
  validate_cmd->add_option("--holdout", flags.holdout, "Validation observations")->required();
  validate_cmd->add_option("--anchors", flags.anchors_path, "Anchor table from estimate")->required();
  validate_cmd->add_option("--delta", flags.delta, "Smoothing bandwidth (default: anchor spacing)");
  validate_cmd->add_option("--knn", flags.knn, "k-nearest neighborhood (0 = global)");
  validate_cmd->add_flag("--no-baseline", flags.no_baseline, "Skip the stationary comparator");
  validate_cmd->add_option("--seed", flags.seed, "Seed (baseline fit multi-starts)");
  validate_cmd->add_option("--out", flags.out, "Output directory");
  flags.model.attach(validate_cmd);
  flags.columns.attach(validate_cmd);

  auto* contours_cmd =
      app.add_subcommand("covariance-contours", "Covariance level contours at selected points");
  contours_cmd->add_option("--anchors", flags.anchors_path, "Anchor table from estimate")->required();
  contours_cmd->add_option("--delta", flags.delta, "Smoothing bandwidth (default: anchor spacing)");
  contours_cmd->add_option("--points", flags.points, "Centers 'x,y;x,y'")->required();
  contours_cmd->add_option("--levels", flags.levels, "Comma-separated levels");
  contours_cmd->add_flag("--absolute-levels", flags.absolute, "Treat levels as absolute covariance");
  contours_cmd->add_option("--out", flags.out, "Output directory");
  flags.model.attach(contours_cmd);

  CLI11_PARSE(app, argc, argv);

  const auto ensure_outdir = [](const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw StageError("config", "cannot create output directory " + dir.string());
  };

  const auto anchors_and_delta = [&](double& delta_out) {
    AnchorEstimates est = read_anchors(flags.anchors_path);
    delta_out = flags.delta > 0.0 ? flags.delta : default_delta(est.anchors);
    return est;
  };

  try {
    if (*run_cmd) {
      run_config.epsilon_grid = parse_doubles(run_eps_grid);
      run_config.delta_grid = parse_doubles(run_delta_grid);
      if (!run_points.empty()) run_config.contour_points = parse_points(run_points);
      if (!run_levels.empty()) run_config.contour_levels = parse_doubles(run_levels);
      parse_dims(run_grid_dims, run_config.grid_nx, run_config.grid_ny);
      run_config.family = run_model.family;
      run_config.matern_nu = run_model.matern_nu;
      run_config.cauchy_alpha = run_model.cauchy_alpha;
      run_config.columns = run_columns.columns;
      run_config.baseline = !run_no_baseline;
      const PipelineResult result = run_pipeline(run_config);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "epsilon " << result.epsilon << "\ndelta " << result.delta << '\n';
      for (const auto& artifact : result.artifacts) std::cout << "wrote " << artifact << '\n';
      return 0;
    }

    if (*estimate_cmd) {
      ensure_outdir(flags.out);
      const Dataset data = load_or_die(flags.input, flags.columns.columns);
      EstimationConfig config;
      config.family = flags.model.make();
      config.anchor_nx = flags.anchor_nx;
      config.anchor_ny = flags.anchor_ny;
      config.n_directions = flags.directions;
      config.distance_classes = flags.distance_classes;
      config.radius_policy = parse_radius_policy(flags.radius_policy);
      config.seed = flags.seed;
      const AnchorEstimates est = estimate_at_anchors(data, flags.epsilon, config);
      for (const auto& w : est.warnings) std::cerr << "[estimate] warning: " << w << '\n';
      write_anchors(flags.out / "anchors.tsv", est);
      write_ellipses(flags.out / "ellipses.tsv", est.anchors, est.fits);
      std::cout << "anchors " << est.anchors.size() << "\nwrote "
                << (flags.out / "anchors.tsv").string() << "\nwrote "
                << (flags.out / "ellipses.tsv").string() << '\n';
      return 0;
    }

    if (*cveps_cmd) {
      ensure_outdir(flags.out);
      const Dataset data = load_or_die(flags.input, flags.columns.columns);
      EstimationConfig config;
      config.family = flags.model.make();
      config.anchor_nx = flags.anchor_nx;
      config.anchor_ny = flags.anchor_ny;
      config.n_directions = flags.directions;
      config.distance_classes = flags.distance_classes;
      config.radius_policy = parse_radius_policy(flags.radius_policy);
      config.seed = flags.seed;
      const EpsilonSelection sel = select_epsilon(data, parse_doubles(flags.eps_grid), config,
                                                  parse_doubles(flags.delta_grid));
      for (const auto& w : sel.warnings) std::cerr << "[cv-epsilon] warning: " << w << '\n';
      std::ofstream out(flags.out / "cv_epsilon.tsv");
      out << std::setprecision(17) << "epsilon\tloo_mse\n";
      for (std::size_t i = 0; i < sel.candidates.size(); ++i)
        out << sel.candidates[i] << '\t' << sel.scores[i] << '\n';
      std::cout << "epsilon " << sel.epsilon << "\nwrote "
                << (flags.out / "cv_epsilon.tsv").string() << '\n';
      return 0;
    }

    if (*cvdelta_cmd) {
      ensure_outdir(flags.out);
      const AnchorEstimates est = read_anchors(flags.anchors_path);
      std::vector<double> sigmas;
      sigmas.reserve(est.fits.size());
      for (const LocalFit& f : est.fits) sigmas.push_back(f.sigma);
      const std::vector<double> grid = parse_doubles(flags.delta_grid);
      const double delta = select_delta(est.anchors, sigmas, grid);
      std::ofstream out(flags.out / "cv_delta.tsv");
      out << std::setprecision(17) << "delta\tchosen\n";
      for (const double d : grid) out << d << '\t' << (d == delta ? 1 : 0) << '\n';
      std::cout << "delta " << delta << "\nwrote " << (flags.out / "cv_delta.tsv").string() << '\n';
      return 0;
    }

    if (*smooth_cmd) {
      ensure_outdir(flags.out);
      double delta = 0.0;
      const AnchorEstimates est = anchors_and_delta(delta);
      const ParameterField field(est.anchors, est.fits, est.means, delta);
      std::size_t nx = 0, ny = 0;
      parse_dims(flags.grid_dims, nx, ny);
      const Grid grid = grid_over(bounding_box(est.anchors), nx, ny);
      write_grid(flags.out / "params_mean.grid",
                 evaluate_grid(grid, [&](Point p) { return field.mean_at(p); }));
      write_grid(flags.out / "params_variance.grid", evaluate_grid(grid, [&](Point p) {
                   const double s = field.sigma_at(p);
                   return s * s;
                 }));
      write_grid(flags.out / "params_aniso_ratio.grid", evaluate_grid(grid, [&](Point p) {
                   const AnisotropyParams a = field.anisotropy_at(p);
                   return a.lambda1 / a.lambda2;
                 }));
      write_grid(flags.out / "params_azimuth.grid",
                 evaluate_grid(grid, [&](Point p) { return field.anisotropy_at(p).psi; }));
      std::cout << "delta " << delta << '\n';
      for (const char* name : {"params_mean.grid", "params_variance.grid",
                               "params_aniso_ratio.grid", "params_azimuth.grid"})
        std::cout << "wrote " << (flags.out / name).string() << '\n';
      return 0;
    }

    if (*krige_cmd) {
      ensure_outdir(flags.out);
      const Dataset data = load_or_die(flags.input, flags.columns.columns);
      double delta = 0.0;
      const AnchorEstimates est = anchors_and_delta(delta);
      const NsModel model = model_from_anchors(est, delta, flags.model.make());
      std::size_t nx = 0, ny = 0;
      parse_dims(flags.grid_dims, nx, ny);
      const Grid grid = grid_over(bounding_box(data.locations), nx, ny);
      NeighborhoodPolicy policy;
      if (flags.knn > 0) {
        policy.force_knn = true;
        policy.k = flags.knn;
      }
      const KrigingResult kr = krige(data, grid.nodes(), model, policy);
      write_grid(flags.out / "pred.grid", GridData(grid, kr.predictions));
      write_grid(flags.out / "pred_sd.grid", GridData(grid, kr.sd));
      std::cout << "wrote " << (flags.out / "pred.grid").string() << "\nwrote "
                << (flags.out / "pred_sd.grid").string() << '\n';
      if (flags.baseline) {
        BaselineConfig bc;
        bc.seed = rng::derive(flags.seed, "baseline");
        const StationaryBaseline baseline = fit_baseline(data, bc);
        const KrigingResult kb = krige_baseline(data, grid.nodes(), baseline, policy);
        write_grid(flags.out / "baseline_pred.grid", GridData(grid, kb.predictions));
        write_grid(flags.out / "baseline_sd.grid", GridData(grid, kb.sd));
        std::cout << "wrote " << (flags.out / "baseline_pred.grid").string() << "\nwrote "
                  << (flags.out / "baseline_sd.grid").string() << '\n';
      }
      return 0;
    }

    if (*simulate_cmd) {
      ensure_outdir(flags.out);
      const Dataset data = load_or_die(flags.input, flags.columns.columns);
      double delta = 0.0;
      const AnchorEstimates est = anchors_and_delta(delta);
      const NsModel model = model_from_anchors(est, delta, flags.model.make());
      std::size_t nx = 0, ny = 0;
      parse_dims(flags.grid_dims, nx, ny);
      const Grid grid = grid_over(bounding_box(data.locations), nx, ny);
      SimulationOptions opts;
      opts.n_sweeps = flags.sweeps;
      for (std::size_t r = 0; r < flags.n_sim; ++r) {
        const std::vector<double> sim = conditional_simulate(
            model, data, grid.nodes(), rng::derive(flags.seed, "realization", r), opts);
        const fs::path p = flags.out / ("sim_" + std::to_string(r + 1) + ".grid");
        write_grid(p, GridData(grid, sim));
        std::cout << "wrote " << p.string() << '\n';
      }
      return 0;
    }

    if (*validate_cmd) {
      ensure_outdir(flags.out);
      const Dataset data = load_or_die(flags.input, flags.columns.columns);
      const Dataset holdout = load_or_die(flags.holdout, flags.columns.columns);
      double delta = 0.0;
      const AnchorEstimates est = anchors_and_delta(delta);
      const NsModel model = model_from_anchors(est, delta, flags.model.make());
      NeighborhoodPolicy policy;
      if (flags.knn > 0) {
        policy.force_knn = true;
        policy.k = flags.knn;
      }
      const KrigingResult kr = krige(data, holdout.locations, model, policy);
      std::vector<std::pair<std::string, ScoreReport>> cols;
      if (!flags.no_baseline) {
        BaselineConfig bc;
        bc.seed = rng::derive(flags.seed, "baseline");
        const StationaryBaseline baseline = fit_baseline(data, bc);
        const KrigingResult kb = krige_baseline(data, holdout.locations, baseline, policy);
        cols.emplace_back("stationary", score(holdout.values, kb.predictions, kb.sd));
      }
      cols.emplace_back("nonstationary", score(holdout.values, kr.predictions, kr.sd));
      write_scores(flags.out / "scores.tsv", cols);
      for (const auto& [name, r] : cols)
        std::cout << name << ": mae " << r.mae << " rmse " << r.rmse << " nmse " << r.nmse
                  << " logs " << r.logs << " crps " << r.crps << '\n';
      std::cout << "wrote " << (flags.out / "scores.tsv").string() << '\n';
      return 0;
    }

    if (*contours_cmd) {
      ensure_outdir(flags.out);
      double delta = 0.0;
      const AnchorEstimates est = anchors_and_delta(delta);
      const NsModel model = model_from_anchors(est, delta, flags.model.make());
      const auto sets = covariance_contours(model, parse_points(flags.points),
                                            parse_doubles(flags.levels), flags.absolute);
      write_contours(flags.out / "contours.tsv", sets);
      std::cout << "wrote " << (flags.out / "contours.tsv").string() << '\n';
      return 0;
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return stage_exit_code(e.stage());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
