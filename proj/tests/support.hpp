#pragma once

// Shared helpers for the test suites: seeded generators of random anisotropy
// configurations, smooth parameter fields and scattered datasets.

#include <nsgeo/anisotropy.hpp>
#include <nsgeo/covariance.hpp>
#include <nsgeo/variogram.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace testsupport {

using namespace nsgeo;

inline AnisotropyParams random_aniso(std::mt19937_64& eng, double lambda_lo = 0.3,
                                     double lambda_hi = 3.0) {
  std::uniform_real_distribution<double> lam(lambda_lo, lambda_hi);
  std::uniform_real_distribution<double> ang(0.0, std::numbers::pi);
  const double a = lam(eng);
  const double b = lam(eng);
  return AnisotropyParams(std::max(a, b), std::min(a, b), ang(eng));
}

inline SpdMatrix random_spd(std::mt19937_64& eng) { return params_to_matrix(random_aniso(eng)); }

inline Point random_point(std::mt19937_64& eng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(eng), u(eng)};
}

/// Smoothly varying anisotropy field: gentle sinusoidal modulation of ranges
/// and a rotating azimuth.
inline AnisotropyField smooth_aniso_field(std::mt19937_64& eng, double base_range = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double l1 = base_range * (0.8 + 0.8 * u(eng));
  const double ratio = 0.4 + 0.5 * u(eng);
  const double freq = 0.2 + 0.3 * u(eng);
  const double phase = 2.0 * std::numbers::pi * u(eng);
  const double psi0 = std::numbers::pi * u(eng);
  return [=](Point p) {
    const double mod = 1.0 + 0.25 * std::sin(freq * p.x + phase) * std::cos(freq * p.y);
    const double a = l1 * mod;
    const double b = l1 * ratio * (1.0 + 0.2 * std::cos(freq * p.y + phase));
    const double psi = psi0 + 0.3 * std::sin(0.5 * freq * (p.x + p.y));
    return AnisotropyParams(std::max(a, b), std::min(a, b), psi);
  };
}

inline ScalarField smooth_positive_field(std::mt19937_64& eng, double base = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double freq = 0.2 + 0.3 * u(eng);
  const double phase = 2.0 * std::numbers::pi * u(eng);
  const double amp = 0.3 * u(eng);
  return [=](Point p) { return base * (1.0 + amp * std::sin(freq * p.x + phase) *
                                                 std::cos(0.7 * freq * p.y)); };
}

inline std::vector<Point> scatter(std::mt19937_64& eng, std::size_t n, double lo, double hi) {
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(random_point(eng, lo, hi));
  return pts;
}

inline NsModel random_model(std::mt19937_64& eng, const CorrelationFamily& family,
                            double base_range = 1.0) {
  NsModel model;
  model.family = family;
  model.sigma = smooth_positive_field(eng, 1.5);
  model.mean = constant_field(0.0);
  model.anisotropy = smooth_aniso_field(eng, base_range);
  return model;
}

}  // namespace testsupport
