#pragma once

#include <nsgeo/covariance.hpp>
#include <nsgeo/variogram.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace nsgeo {

/// Symmetric correlation accessor over site indices; must have a unit
/// diagonal. Rows are queried on demand, so no n x n storage is implied.
using CorrelationAccessor = std::function<double(std::size_t, std::size_t)>;

/// Propagative Gibbs sampler targeting N(0, C): each step draws a standard
/// normal at a uniformly random pivot a and spreads the innovation,
/// z_b <- z_b + C_ab (z_a' - z_a). One sweep is n_sites single-pivot updates.
/// Deterministic for a given seed and sweep count. Starts from zero unless an
/// initial state is supplied.
Eigen::VectorXd gibbs_propagative(const CorrelationAccessor& corr, std::size_t n_sites,
                                  std::size_t n_sweeps, std::uint64_t seed,
                                  const std::optional<Eigen::VectorXd>& initial = std::nullopt);

/// Exact N(0, C) draw through a Cholesky factor; small-n oracle (n <= 2000).
Eigen::VectorXd cholesky_sample(const Eigen::MatrixXd& c, std::uint64_t seed);

struct SimulationOptions {
  std::size_t n_sweeps = 100;  // burn-in sweeps of the Gibbs chain
  bool use_cholesky = false;   // small-n exact sampler instead of Gibbs
};

/// Unconditional simulation of the model at the given sites:
/// Y(x) = m(x) + sigma(x) Z(x) with Z standardized and correlated by R^NS.
std::vector<double> unconditional_simulate(const NsModel& model, const std::vector<Point>& sites,
                                           std::uint64_t seed, const SimulationOptions& opts = {});

/// Conditions an unconditional realization on the data by simple kriging of
/// the simulated-minus-observed residual: output equals the observations at
/// every data location. x_targets / x_data hold the realization's values at
/// the targets and at the data locations. Empty data passes the realization
/// through unchanged.
std::vector<double> condition(const std::vector<Point>& targets,
                              const std::vector<double>& x_targets,
                              const std::vector<double>& x_data, const Dataset& data,
                              const NsModel& model);

/// Unconditional simulation at targets and data locations followed by the
/// conditioning step.
std::vector<double> conditional_simulate(const NsModel& model, const Dataset& data,
                                         const std::vector<Point>& targets, std::uint64_t seed,
                                         const SimulationOptions& opts = {});

}  // namespace nsgeo
