#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace nsgeo::detail {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evals = 0;
  bool converged = false;
};

/// Derivative-free simplex minimization with box projection. Stops when the
/// simplex value spread drops below ftol_rel * max(|best|, tiny) or the
/// evaluation budget is exhausted. Dimensions with infinite bounds are left
/// unclamped.
inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& start, const Eigen::VectorXd& lo,
                                    const Eigen::VectorXd& hi, const Eigen::VectorXd& step,
                                    std::size_t max_evals, double ftol_rel) {
  const auto dim = start.size();
  const auto clamp = [&](Eigen::VectorXd v) {
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
    return v;
  };

  NelderMeadResult result;
  std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(dim) + 1);
  std::vector<double> fs(xs.size());
  xs[0] = clamp(start);
  fs[0] = f(xs[0]);
  ++result.evals;
  for (Eigen::Index i = 0; i < dim; ++i) {
    Eigen::VectorXd v = xs[0];
    v[i] += step[i];
    xs[static_cast<std::size_t>(i) + 1] = clamp(v);
    fs[static_cast<std::size_t>(i) + 1] = f(xs[static_cast<std::size_t>(i) + 1]);
    ++result.evals;
  }

  std::vector<std::size_t> order(xs.size());
  const auto sort_simplex = [&] {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
  };

  while (result.evals < max_evals) {
    sort_simplex();
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];

    const double spread = fs[worst] - fs[best];
    if (spread <= ftol_rel * std::max(std::abs(fs[best]), 1e-300)) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (i != worst) centroid += xs[i];
    centroid /= static_cast<double>(xs.size() - 1);

    const auto eval = [&](const Eigen::VectorXd& v) {
      ++result.evals;
      return f(v);
    };

    Eigen::VectorXd reflected = clamp(centroid + (centroid - xs[worst]));
    const double fr = eval(reflected);
    if (fr < fs[best]) {
      Eigen::VectorXd expanded = clamp(centroid + 2.0 * (centroid - xs[worst]));
      const double fe = eval(expanded);
      if (fe < fr) {
        xs[worst] = expanded;
        fs[worst] = fe;
      } else {
        xs[worst] = reflected;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second_worst]) {
      xs[worst] = reflected;
      fs[worst] = fr;
      continue;
    }
    Eigen::VectorXd contracted = clamp(centroid + 0.5 * (xs[worst] - centroid));
    const double fc = eval(contracted);
    if (fc < fs[worst]) {
      xs[worst] = contracted;
      fs[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i == best) continue;
      xs[i] = clamp(xs[best] + 0.5 * (xs[i] - xs[best]));
      fs[i] = eval(xs[i]);
      if (result.evals >= max_evals) break;
    }
  }

  sort_simplex();
  result.x = xs[order.front()];
  result.value = fs[order.front()];
  return result;
}

}  // namespace nsgeo::detail
