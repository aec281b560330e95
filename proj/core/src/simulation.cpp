#include <nsgeo/simulation.hpp>

#include <nsgeo/prediction.hpp>
#include <nsgeo/rng.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

namespace nsgeo {

Eigen::VectorXd gibbs_propagative(const CorrelationAccessor& corr, std::size_t n_sites,
                                  std::size_t n_sweeps, std::uint64_t seed,
                                  const std::optional<Eigen::VectorXd>& initial) {
  if (n_sites == 0) throw std::invalid_argument("gibbs_propagative: no sites");
  for (std::size_t i = 0; i < n_sites; ++i)
    if (std::abs(corr(i, i) - 1.0) > 1e-12)
      throw std::invalid_argument("gibbs_propagative: correlation diagonal must be 1");

  Eigen::VectorXd z;
  if (initial) {
    if (initial->size() != static_cast<Eigen::Index>(n_sites))
      throw std::invalid_argument("gibbs_propagative: initial state size mismatch");
    z = *initial;
  } else {
    z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_sites));
  }

  std::mt19937_64 eng = rng::engine(seed, "gibbs");
  std::uniform_int_distribution<std::size_t> pick(0, n_sites - 1);
  std::normal_distribution<double> gauss;

  const std::size_t updates = n_sweeps * n_sites;
  for (std::size_t step = 0; step < updates; ++step) {
    const std::size_t a = pick(eng);
    const double znew = gauss(eng);
    const double innovation = znew - z[static_cast<Eigen::Index>(a)];
    for (std::size_t b = 0; b < n_sites; ++b) {
      if (b == a) continue;
      z[static_cast<Eigen::Index>(b)] += corr(a, b) * innovation;
    }
    z[static_cast<Eigen::Index>(a)] = znew;
  }
  return z;
}

Eigen::VectorXd cholesky_sample(const Eigen::MatrixXd& c, std::uint64_t seed) {
  if (c.rows() != c.cols()) throw std::invalid_argument("cholesky_sample: non-square matrix");
  if (c.rows() > 2000)
    throw std::invalid_argument("cholesky_sample: small-n oracle only (n <= 2000)");
  Eigen::MatrixXd work = c;
  Eigen::LLT<Eigen::MatrixXd> llt(work);
  if (llt.info() != Eigen::Success) {
    work.diagonal().array() += 1e-10 * work.diagonal().mean();
    llt.compute(work);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("cholesky_sample: factorization failed");
  }
  std::mt19937_64 eng = rng::engine(seed, "cholesky");
  std::normal_distribution<double> gauss;
  Eigen::VectorXd g(c.rows());
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = gauss(eng);
  return llt.matrixL() * g;
}

std::vector<double> unconditional_simulate(const NsModel& model, const std::vector<Point>& sites,
                                           std::uint64_t seed, const SimulationOptions& opts) {
  if (sites.empty()) throw std::invalid_argument("unconditional_simulate: no sites");
  const std::size_t n = sites.size();

  std::vector<double> sigmas(n), means(n);
  double sigma_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    means[i] = model.mean(sites[i]);
    sigmas[i] = model.sigma(sites[i]);
    if (!(sigmas[i] >= 0.0))
      throw std::invalid_argument("unconditional_simulate: sigma must be >= 0");
    sigma_max = std::max(sigma_max, sigmas[i]);
  }
  if (sigma_max == 0.0) return means;  // degenerate field: the mean surface

  Eigen::VectorXd z;
  if (opts.use_cholesky) {
    const auto ni = static_cast<Eigen::Index>(n);
    const CachedCorrelation cache(model, sites);
    Eigen::MatrixXd r(ni, ni);
    for (Eigen::Index i = 0; i < ni; ++i)
      for (Eigen::Index j = i; j < ni; ++j)
        r(i, j) = r(j, i) =
            cache.correlation(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    z = cholesky_sample(r, seed);
  } else {
    const CachedCorrelation cache(model, sites);
    z = gibbs_propagative([&](std::size_t i, std::size_t j) { return cache.correlation(i, j); }, n,
                          opts.n_sweeps, seed);
  }

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = means[i] + sigmas[i] * z[static_cast<Eigen::Index>(i)];
  return out;
}

std::vector<double> condition(const std::vector<Point>& targets,
                              const std::vector<double>& x_targets,
                              const std::vector<double>& x_data, const Dataset& data,
                              const NsModel& model) {
  if (targets.size() != x_targets.size())
    throw std::invalid_argument("condition: target values size mismatch");
  if (data.size() != x_data.size())
    throw std::invalid_argument("condition: data values size mismatch");
  if (data.size() == 0) return x_targets;

  // Simple kriging of the residual X - Y (zero mean, same correlation).
  Dataset residual;
  residual.locations = data.locations;
  residual.values.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) residual.values[i] = x_data[i] - data.values[i];

  NsModel residual_model = model;
  residual_model.mean = constant_field(0.0);
  const KrigingResult correction = krige(residual, targets, residual_model);

  std::vector<double> out(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t)
    out[t] = x_targets[t] - correction.predictions[t];
  return out;
}

std::vector<double> conditional_simulate(const NsModel& model, const Dataset& data,
                                         const std::vector<Point>& targets, std::uint64_t seed,
                                         const SimulationOptions& opts) {
  // Simulate once over the union of targets and data locations, reusing the
  // target's value when a data point coincides with it.
  std::vector<Point> all_sites = targets;
  std::vector<std::size_t> data_slot(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    bool found = false;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      if (targets[t] == data.locations[i]) {
        data_slot[i] = t;
        found = true;
        break;
      }
    }
    if (!found) {
      data_slot[i] = all_sites.size();
      all_sites.push_back(data.locations[i]);
    }
  }

  const std::vector<double> x =
      unconditional_simulate(model, all_sites, rng::derive(seed, "simulation"), opts);

  std::vector<double> x_targets(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) x_targets[t] = x[t];
  std::vector<double> x_data(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) x_data[i] = x[data_slot[i]];

  return condition(targets, x_targets, x_data, data, model);
}

}  // namespace nsgeo
