#include <nsgeo/prediction.hpp>

#include <nsgeo/parallel.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace nsgeo {

namespace {

// Abstract second-order structure over data indices and target points; the
// non-stationary and baseline paths share the solver through it.
struct KrigingProblem {
  std::function<double(std::size_t, std::size_t)> data_cov;
  std::function<double(std::size_t, std::size_t)> target_cov;  // (data index, target index)
  std::function<double(std::size_t)> prior_variance;           // at target index
  std::function<double(std::size_t)> data_mean;
  std::function<double(std::size_t)> target_mean;
};

Eigen::LLT<Eigen::MatrixXd> factor_with_jitter(Eigen::MatrixXd& c, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) {
    c.diagonal().array() += 1e-10 * c.diagonal().mean();
    llt.compute(c);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error(std::string(what) + ": singular covariance matrix");
  }
  return llt;
}

void check_variance(double& q, double prior) {
  if (q < -1e-10 * std::max(1.0, prior))
    throw std::logic_error("krige: negative kriging variance (SPD violation)");
  q = std::max(q, 0.0);
}

KrigingResult solve_global(const Dataset& data, const std::vector<Point>& targets,
                           const KrigingProblem& p) {
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      c(i, j) = c(j, i) = p.data_cov(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  const auto llt = factor_with_jitter(c, "krige");

  Eigen::VectorXd residual(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    residual[i] = data.values[ii] - p.data_mean(ii);
  }
  const Eigen::VectorXd alpha = llt.solve(residual);

  KrigingResult out;
  out.targets = targets;
  out.predictions.assign(targets.size(), 0.0);
  out.sd.assign(targets.size(), 0.0);

  parallel_for(targets.size(), [&](std::size_t t) {
    Eigen::VectorXd c0(n);
    for (Eigen::Index i = 0; i < n; ++i) c0[i] = p.target_cov(static_cast<std::size_t>(i), t);
    out.predictions[t] = p.target_mean(t) + c0.dot(alpha);
    double q = p.prior_variance(t) - c0.dot(llt.solve(c0));
    check_variance(q, p.prior_variance(t));
    out.sd[t] = std::sqrt(q);
  });
  return out;
}

KrigingResult solve_knn(const Dataset& data, const std::vector<Point>& targets,
                        const KrigingProblem& p, std::size_t k) {
  const std::size_t n = data.size();
  k = std::min(k, n);
  KrigingResult out;
  out.targets = targets;
  out.predictions.assign(targets.size(), 0.0);
  out.sd.assign(targets.size(), 0.0);

  parallel_for(targets.size(), [&](std::size_t t) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        return distance(data.locations[a], targets[t]) <
                               distance(data.locations[b], targets[t]);
                      });
    idx.resize(k);

    const auto m = static_cast<Eigen::Index>(k);
    Eigen::MatrixXd c(m, m);
    Eigen::VectorXd c0(m), residual(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const std::size_t di = idx[static_cast<std::size_t>(i)];
      c0[i] = p.target_cov(di, t);
      residual[i] = data.values[di] - p.data_mean(di);
      for (Eigen::Index j = i; j < m; ++j)
        c(i, j) = c(j, i) = p.data_cov(di, idx[static_cast<std::size_t>(j)]);
    }
    const auto llt = factor_with_jitter(c, "krige(knn)");
    out.predictions[t] = p.target_mean(t) + c0.dot(llt.solve(residual));
    double q = p.prior_variance(t) - c0.dot(llt.solve(c0));
    check_variance(q, p.prior_variance(t));
    out.sd[t] = std::sqrt(q);
  });
  return out;
}

KrigingResult solve(const Dataset& data, const std::vector<Point>& targets,
                    const KrigingProblem& p, const NeighborhoodPolicy& policy) {
  if (data.size() == 0) throw std::invalid_argument("krige: empty dataset");
  if (policy.force_knn || data.size() > policy.max_global)
    return solve_knn(data, targets, p, policy.k);
  return solve_global(data, targets, p);
}

}  // namespace

KrigingResult krige(const Dataset& data, const std::vector<Point>& targets, const NsModel& model,
                    const NeighborhoodPolicy& policy) {
  // One parameter-field evaluation per point, shared across all pairs.
  std::vector<Point> all_points = data.locations;
  all_points.insert(all_points.end(), targets.begin(), targets.end());
  const CachedCorrelation cache(model, all_points);
  const std::size_t n = data.size();

  std::vector<double> data_means(n);
  for (std::size_t i = 0; i < n; ++i) data_means[i] = model.mean(data.locations[i]);
  std::vector<double> target_means(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) target_means[t] = model.mean(targets[t]);

  KrigingProblem p;
  p.data_cov = [&](std::size_t i, std::size_t j) { return cache.covariance(i, j); };
  p.target_cov = [&](std::size_t i, std::size_t t) { return cache.covariance(i, n + t); };
  p.prior_variance = [&](std::size_t t) { return cache.sigma(n + t) * cache.sigma(n + t); };
  p.data_mean = [&](std::size_t i) { return data_means[i]; };
  p.target_mean = [&](std::size_t t) { return target_means[t]; };
  return solve(data, targets, p, policy);
}

KrigingResult krige_baseline(const Dataset& data, const std::vector<Point>& targets,
                             const StationaryBaseline& model, const NeighborhoodPolicy& policy) {
  KrigingProblem p;
  p.data_cov = [&](std::size_t i, std::size_t j) {
    return stationary_covariance(data.locations[i] - data.locations[j], model);
  };
  p.target_cov = [&](std::size_t i, std::size_t t) {
    return stationary_covariance(data.locations[i] - targets[t], model);
  };
  p.prior_variance = [&](std::size_t) { return model.total_sill(); };
  p.data_mean = [&](std::size_t) { return model.mean; };
  p.target_mean = [&](std::size_t) { return model.mean; };
  return solve(data, targets, p, policy);
}

}  // namespace nsgeo
