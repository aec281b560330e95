#pragma once

#include <nsgeo/covariance.hpp>
#include <nsgeo/geometry.hpp>

#include <cstdint>
#include <utility>
#include <vector>

namespace nsgeo {

// Numerical routes to the non-stationary covariance that do not share code
// with the closed forms: a scale-mixture quadrature, the kernel-overlap
// integral, and a white-noise convolution Monte Carlo. They exist to verify
// the closed forms and stay deliberately independent of them.

struct QuadratureResult {
  double correlation = 0.0;
  double covariance = 0.0;
  double rel_error = 0.0;  // achieved relative error estimate
  bool converged = true;
};

/// Integrates the scale mixture over the bandwidth measure (substituted to
/// w = t^2, adaptive Gauss-Kronrod in log w with tails truncated at measure
/// mass ~1e-10), then normalizes to a correlation. Non-convergence is reported
/// through rel_error / converged rather than thrown.
QuadratureResult quadrature_oracle(Point x, Point y, const NsModel& model);

struct Lemma1Result {
  double numeric = 0.0;
  double closed_form = 0.0;
};

/// 2-D adaptive quadrature of the overlap integral of two Gaussian kernels
/// centered at x and y with covariances (t^2/4) Sx and (t^2/4) Sy, against the
/// closed form pi^{-1} t^{-2} |(Sx+Sy)/2|^{-1/2} exp(-Q/t^2).
Lemma1Result lemma1_check(Point x, Point y, const SpdMatrix& sx, const SpdMatrix& sy, double t);

struct McPairEstimate {
  Point x;
  Point y;
  double empirical_cov = 0.0;
  double mc_se = 0.0;
};

/// Discretizes the white-noise convolution on the given grid and estimates
/// covariances at the requested point pairs over seeded realizations.
/// Supported for the Gaussian family only (point-mass bandwidth); kernels are
/// truncated at 4 standard deviations. Throws if the grid does not hold at
/// least 99% of some kernel's mass.
std::vector<McPairEstimate> convolution_mc_oracle(const NsModel& model, const Grid& grid,
                                                  const std::vector<std::pair<Point, Point>>& pairs,
                                                  std::size_t n_realizations, std::uint64_t seed);

}  // namespace nsgeo
