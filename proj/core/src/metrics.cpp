#include <nsgeo/metrics.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nsgeo {

double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double gaussian_crps(double observed, double mu, double sd) {
  if (sd < 0.0) throw std::invalid_argument("gaussian_crps: sd must be >= 0");
  const double e = observed - mu;
  if (sd == 0.0) return std::abs(e);
  const double z = e / sd;
  return sd * (z * (2.0 * norm_cdf(z) - 1.0) + 2.0 * norm_pdf(z) -
               1.0 / std::sqrt(std::numbers::pi));
}

ScoreReport score(const std::vector<double>& observed, const std::vector<double>& predicted,
                  const std::vector<double>& pred_sd) {
  const std::size_t n = observed.size();
  if (n == 0) throw std::invalid_argument("score: empty validation set");
  if (predicted.size() != n || pred_sd.size() != n)
    throw std::invalid_argument("score: length mismatch");

  ScoreReport r;
  r.n = n;
  double se = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sd = pred_sd[i];
    if (sd < 0.0) throw std::invalid_argument("score: negative prediction sd");
    const double e = observed[i] - predicted[i];
    r.mae += std::abs(e);
    se += e * e;
    if (sd == 0.0) {
      r.nmse += e == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      r.logs += e == 0.0 ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
    } else {
      r.nmse += e * e / (sd * sd);
      r.logs += 0.5 * std::log(2.0 * std::numbers::pi * sd * sd) + e * e / (2.0 * sd * sd);
    }
    r.crps += gaussian_crps(observed[i], predicted[i], sd);
  }
  const double dn = static_cast<double>(n);
  r.mae /= dn;
  r.rmse = std::sqrt(se / dn);
  r.nmse /= dn;
  r.logs_mean = r.logs / dn;
  r.crps /= dn;
  return r;
}

}  // namespace nsgeo
