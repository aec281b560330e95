#include <nsgeo/pipeline.hpp>

#include <nsgeo/detail/nelder_mead.hpp>
#include <nsgeo/rng.hpp>
#include <nsgeo/simulation.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

namespace nsgeo {

namespace {

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 1.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

double baseline_mean(const Dataset& data, const StationaryBaseline& model) {
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      c(i, j) = c(j, i) = stationary_covariance(
          data.locations[static_cast<std::size_t>(i)] - data.locations[static_cast<std::size_t>(j)],
          model);
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) {
    c.diagonal().array() += 1e-10 * c.diagonal().mean();
    llt.compute(c);
  }
  if (llt.info() != Eigen::Success) {
    double s = 0.0;
    for (double v : data.values) s += v;
    return s / static_cast<double>(data.size());
  }
  const Eigen::VectorXd beta = llt.solve(Eigen::VectorXd::Ones(n));
  const Eigen::Map<const Eigen::VectorXd> y(data.values.data(), n);
  return beta.dot(y) / beta.sum();
}

}  // namespace

StationaryBaseline fit_baseline(const Dataset& data, const BaselineConfig& config) {
  if (data.size() < 3) throw std::invalid_argument("fit_baseline: too few observations");
  if (config.profiles.empty()) throw std::invalid_argument("fit_baseline: no profile structures");

  const double diam = bounding_box(data.locations).diameter();
  const LagSystem lags = isotropic_lags(config.distance_classes, 0.5 * diam);
  const LocalVariogram vario = matheron_variogram(data, lags);

  std::vector<std::size_t> active;
  for (std::size_t b = 0; b < vario.lags.size(); ++b)
    if (vario.nonempty[b]) active.push_back(b);
  const std::size_t n_params = (config.nugget ? 1 : 0) + 2 * config.profiles.size();
  if (active.size() < n_params)
    throw std::runtime_error("fit_baseline: fewer nonempty lag classes than parameters");

  const double var = std::max(sample_variance(data.values), 1e-30);
  // u: [c0 (linear)] + per profile (log sill, log range).
  const auto assemble = [&](const Eigen::VectorXd& u) {
    StationaryBaseline model;
    Eigen::Index d = 0;
    if (config.nugget) model.structures.push_back(NuggetStructure{u[d++]});
    for (const auto profile : config.profiles) {
      StationaryStructure s;
      s.profile = profile;
      s.sill = std::exp(u[d++]);
      const double r = std::exp(u[d++]);
      s.ranges = AnisotropyParams(r, r, 0.0);
      model.structures.push_back(s);
    }
    return model;
  };
  const auto objective = [&](const Eigen::VectorXd& u) {
    const StationaryBaseline model = assemble(u);
    const double sill = model.total_sill();
    double ss = 0.0;
    for (std::size_t b : active) {
      const double gamma_model = sill - stationary_covariance(vario.lags.lags[b].h, model);
      const double r = vario.weights[b] * (gamma_model - vario.gamma[b]);
      ss += r * r;
    }
    return std::sqrt(ss);
  };

  const auto dim = static_cast<Eigen::Index>(n_params);
  Eigen::VectorXd lo(dim), hi(dim), step(dim), start0(dim);
  Eigen::Index d = 0;
  if (config.nugget) {
    lo[d] = 0.0;
    hi[d] = 10.0 * var;
    step[d] = 0.1 * var;
    start0[d] = 0.05 * var;
    ++d;
  }
  for (std::size_t s = 0; s < config.profiles.size(); ++s) {
    lo[d] = std::log(1e-6 * var);
    hi[d] = std::log(10.0 * var);
    step[d] = 0.5;
    start0[d] = std::log(var / static_cast<double>(config.profiles.size()));
    ++d;
    lo[d] = std::log(1e-3 * diam);
    hi[d] = std::log(10.0 * diam);
    step[d] = 0.5;
    start0[d] = std::log(diam / (6.0 * static_cast<double>(s + 1)));
    ++d;
  }

  detail::NelderMeadResult best;
  for (std::size_t s = 0; s < std::max<std::size_t>(config.multistarts, 1); ++s) {
    Eigen::VectorXd start = start0;
    if (s > 0) {
      std::mt19937_64 eng = rng::engine(config.seed, "baseline-multistart", s);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (Eigen::Index i = 0; i < dim; ++i) start[i] = lo[i] + unit(eng) * (hi[i] - lo[i]);
    }
    const auto run = detail::nelder_mead(objective, start, lo, hi, step, config.max_evals, 1e-10);
    if (run.value < best.value) best = run;
  }

  StationaryBaseline model = assemble(best.x);
  model.mean = baseline_mean(data, model);
  return model;
}

std::vector<ContourSet> covariance_contours(const NsModel& model, const std::vector<Point>& centers,
                                            const std::vector<double>& levels, bool absolute,
                                            std::size_t grid_n) {
  if (grid_n < 8) throw std::invalid_argument("covariance_contours: grid too coarse");
  std::vector<ContourSet> out;
  for (const Point c : centers) {
    const AnisotropyParams aniso = model.anisotropy(c);
    const double sigma2 = model.sigma(c) * model.sigma(c);
    const double reach = 4.0 * family_scale(model.family) * aniso.lambda1;
    const Grid local({c.x - reach, c.y - reach}, 2.0 * reach / static_cast<double>(grid_n - 1),
                     2.0 * reach / static_cast<double>(grid_n - 1), grid_n, grid_n);
    GridData field(local, std::vector<double>(local.size(), 0.0));
    for (std::size_t j = 0; j < local.ny; ++j)
      for (std::size_t i = 0; i < local.nx; ++i)
        field.values[local.index(i, j)] = ns_covariance(c, local.node(i, j), model);
    for (const double level : levels) {
      ContourSet set;
      set.center = c;
      set.level = absolute ? level : level * sigma2;
      set.polylines = contour_polylines(field, set.level);
      out.push_back(std::move(set));
    }
  }
  return out;
}

CorrelationFamily make_family(const RunConfig& config) {
  // The inference pipeline fixes the scale a = 1; ranges live in Sigma(.).
  if (config.family == "exponential") return ExponentialFamily{1.0};
  if (config.family == "gaussian") return GaussianFamily{1.0};
  if (config.family == "matern") return MaternFamily{1.0, config.matern_nu, std::nullopt};
  if (config.family == "cauchy") return CauchyFamily{1.0, config.cauchy_alpha, std::nullopt};
  throw StageError("config", "unknown family '" + config.family + "'");
}

RadiusPolicy parse_radius_policy(const std::string& name) {
  if (name == "sqrt3") return RadiusPolicy::sd_match;
  if (name == "quantile") return RadiusPolicy::quantile;
  if (name == "fwhm") return RadiusPolicy::fwhm;
  throw StageError("config", "unknown radius policy '" + name + "'");
}

EstimationConfig estimation_config(const RunConfig& config) {
  EstimationConfig est;
  est.family = make_family(config);
  est.anchor_nx = config.anchor_nx;
  est.anchor_ny = config.anchor_ny;
  est.n_directions = config.n_directions;
  est.distance_classes = config.distance_classes;
  est.radius_policy = parse_radius_policy(config.radius_policy);
  est.seed = rng::derive(config.seed, "estimation");
  return est;
}

PipelineResult run_pipeline(const RunConfig& config) {
  PipelineResult result;
  namespace fs = std::filesystem;

  const auto stage = [](const char* name, auto&& fn) -> decltype(fn()) {
    try {
      return fn();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  };

  const auto emit = [&](const fs::path& p) { result.artifacts.push_back(p.string()); };

  if (config.epsilon_grid.empty())
    throw StageError("config", "no epsilon bandwidth given (set --epsilon or --epsilon-grid)");
  std::error_code ec;
  fs::create_directories(config.outdir, ec);
  if (ec) throw StageError("config", "cannot create output directory " + config.outdir.string());

  // load
  const LoadReport loaded = stage("load", [&] { return load_dataset(config.input, config.columns); });
  for (const auto& w : loaded.warnings) result.warnings.push_back("[load] " + w);
  const Dataset& data = loaded.data;
  const EstimationConfig est_config = estimation_config(config);
  const CorrelationFamily family = make_family(config);

  // cv-epsilon
  double epsilon = config.epsilon_grid.front();
  if (config.epsilon_grid.size() > 1) {
    const EpsilonSelection sel = stage("cv-epsilon", [&] {
      return select_epsilon(data, config.epsilon_grid, est_config, config.delta_grid);
    });
    for (const auto& w : sel.warnings) result.warnings.push_back("[cv-epsilon] " + w);
    epsilon = sel.epsilon;
    const fs::path p = config.outdir / "cv_epsilon.tsv";
    std::ofstream out(p);
    out << std::setprecision(17) << "epsilon\tloo_mse\n";
    for (std::size_t i = 0; i < sel.candidates.size(); ++i)
      out << sel.candidates[i] << '\t' << sel.scores[i] << '\n';
    emit(p);
  }
  result.epsilon = epsilon;

  // estimate
  const AnchorEstimates est =
      stage("estimate", [&] { return estimate_at_anchors(data, epsilon, est_config); });
  for (const auto& w : est.warnings) result.warnings.push_back("[estimate] " + w);
  stage("estimate", [&] {
    write_anchors(config.outdir / "anchors.tsv", est);
    write_ellipses(config.outdir / "ellipses.tsv", est.anchors, est.fits);
    return 0;
  });
  emit(config.outdir / "anchors.tsv");
  emit(config.outdir / "ellipses.tsv");

  // cv-delta
  const BoundingBox box = bounding_box(data.locations);
  const double anchor_dx =
      config.anchor_nx > 1 ? box.width() / static_cast<double>(config.anchor_nx - 1) : box.width();
  const double anchor_dy =
      config.anchor_ny > 1 ? box.height() / static_cast<double>(config.anchor_ny - 1) : box.height();
  double delta = std::max({anchor_dx, anchor_dy, 1e-12});
  if (!config.delta_grid.empty()) {
    if (config.delta_grid.size() == 1) {
      delta = config.delta_grid.front();
    } else {
      delta = stage("cv-delta", [&] {
        std::vector<double> sigmas;
        sigmas.reserve(est.fits.size());
        for (const LocalFit& f : est.fits) sigmas.push_back(f.sigma);
        const double chosen = select_delta(est.anchors, sigmas, config.delta_grid);
        const fs::path p = config.outdir / "cv_delta.tsv";
        std::ofstream out(p);
        out << std::setprecision(17) << "delta\tchosen\n";
        for (const double d : config.delta_grid)
          out << d << '\t' << (d == chosen ? 1 : 0) << '\n';
        emit(p);
        return chosen;
      });
    }
  }
  result.delta = delta;

  // smooth: parameter maps over the output grid
  const ParameterField field(est.anchors, est.fits, est.means, delta);
  const NsModel model = field.to_model(family);
  const Grid out_grid = grid_over(box, config.grid_nx, config.grid_ny);
  stage("smooth", [&] {
    GridData mean_map(out_grid, std::vector<double>(out_grid.size(), 0.0));
    GridData var_map = mean_map, ratio_map = mean_map, azimuth_map = mean_map;
    for (std::size_t j = 0; j < out_grid.ny; ++j) {
      for (std::size_t i = 0; i < out_grid.nx; ++i) {
        const Point p = out_grid.node(i, j);
        const std::size_t idx = out_grid.index(i, j);
        mean_map.values[idx] = field.mean_at(p);
        const double s = field.sigma_at(p);
        var_map.values[idx] = s * s;
        const AnisotropyParams aniso = field.anisotropy_at(p);
        ratio_map.values[idx] = aniso.lambda1 / aniso.lambda2;
        azimuth_map.values[idx] = aniso.psi;
      }
    }
    write_grid(config.outdir / "params_mean.grid", mean_map);
    write_grid(config.outdir / "params_variance.grid", var_map);
    write_grid(config.outdir / "params_aniso_ratio.grid", ratio_map);
    write_grid(config.outdir / "params_azimuth.grid", azimuth_map);
    return 0;
  });
  emit(config.outdir / "params_mean.grid");
  emit(config.outdir / "params_variance.grid");
  emit(config.outdir / "params_aniso_ratio.grid");
  emit(config.outdir / "params_azimuth.grid");

  NeighborhoodPolicy policy;
  if (config.knn > 0) {
    policy.force_knn = true;
    policy.k = config.knn;
  }

  // baseline comparator
  StationaryBaseline baseline;
  if (config.baseline) {
    BaselineConfig bc;
    bc.seed = rng::derive(config.seed, "baseline");
    baseline = stage("baseline", [&] { return fit_baseline(data, bc); });
  }

  // krige
  const std::vector<Point> grid_nodes = out_grid.nodes();
  stage("krige", [&] {
    const KrigingResult kr = krige(data, grid_nodes, model, policy);
    write_grid(config.outdir / "pred.grid", GridData(out_grid, kr.predictions));
    write_grid(config.outdir / "pred_sd.grid", GridData(out_grid, kr.sd));
    if (config.baseline) {
      const KrigingResult kb = krige_baseline(data, grid_nodes, baseline, policy);
      write_grid(config.outdir / "baseline_pred.grid", GridData(out_grid, kb.predictions));
      write_grid(config.outdir / "baseline_sd.grid", GridData(out_grid, kb.sd));
    }
    return 0;
  });
  emit(config.outdir / "pred.grid");
  emit(config.outdir / "pred_sd.grid");
  if (config.baseline) {
    emit(config.outdir / "baseline_pred.grid");
    emit(config.outdir / "baseline_sd.grid");
  }

  // simulate
  if (config.n_realizations > 0) {
    stage("simulate", [&] {
      SimulationOptions opts;
      opts.n_sweeps = config.gibbs_sweeps;
      for (std::size_t r = 0; r < config.n_realizations; ++r) {
        const std::vector<double> sim = conditional_simulate(
            model, data, grid_nodes, rng::derive(config.seed, "realization", r), opts);
        const fs::path p = config.outdir / ("sim_" + std::to_string(r + 1) + ".grid");
        write_grid(p, GridData(out_grid, sim));
        emit(p);
      }
      return 0;
    });
  }

  // validate
  if (!config.holdout.empty()) {
    stage("validate", [&] {
      const LoadReport hold = load_dataset(config.holdout, config.columns);
      for (const auto& w : hold.warnings) result.warnings.push_back("[validate] " + w);
      const KrigingResult kr = krige(data, hold.data.locations, model, policy);
      std::vector<std::pair<std::string, ScoreReport>> cols;
      if (config.baseline) {
        const KrigingResult kb = krige_baseline(data, hold.data.locations, baseline, policy);
        cols.emplace_back("stationary", score(hold.data.values, kb.predictions, kb.sd));
      }
      cols.emplace_back("nonstationary", score(hold.data.values, kr.predictions, kr.sd));
      write_scores(config.outdir / "scores.tsv", cols);
      return 0;
    });
    emit(config.outdir / "scores.tsv");
  }

  // covariance-contours
  if (!config.contour_points.empty()) {
    stage("covariance-contours", [&] {
      const auto sets = covariance_contours(model, config.contour_points, config.contour_levels,
                                            config.contour_absolute);
      write_contours(config.outdir / "contours.tsv", sets);
      return 0;
    });
    emit(config.outdir / "contours.tsv");
  }

  return result;
}

}  // namespace nsgeo
