#pragma once

#include <cstddef>
#include <vector>

namespace nsgeo {

/// External-validation discrepancy measures. logs is the summed Gaussian
/// negative log-density (the magnitude reported in validation tables);
/// logs_mean is the per-point average, reported alongside since the summing
/// convention is an interpretation.
struct ScoreReport {
  double mae = 0.0;
  double rmse = 0.0;
  double nmse = 0.0;
  double logs = 0.0;
  double logs_mean = 0.0;
  double crps = 0.0;
  std::size_t n = 0;
};

/// Gaussian predictive scores of (predicted, pred_sd) against observed:
///   MAE  = mean |e|
///   RMSE = sqrt(mean e^2)
///   NMSE = mean e^2 / sd^2
///   LogS = sum [ 0.5 log(2 pi sd^2) + e^2 / (2 sd^2) ]
///   CRPS = mean sd [ z (2 Phi(z) - 1) + 2 phi(z) - 1/sqrt(pi) ], z = e / sd
/// with e = observed - predicted. A zero sd with nonzero error yields an
/// infinite LogS/NMSE, reported as such; the CRPS degenerates to |e|.
ScoreReport score(const std::vector<double>& observed, const std::vector<double>& predicted,
                  const std::vector<double>& pred_sd);

/// Standard normal density and distribution function.
double norm_pdf(double z);
double norm_cdf(double z);

/// Closed-form CRPS of the Gaussian predictive distribution N(mu, sd^2).
double gaussian_crps(double observed, double mu, double sd);

}  // namespace nsgeo
