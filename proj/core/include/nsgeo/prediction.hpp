#pragma once

#include <nsgeo/covariance.hpp>
#include <nsgeo/variogram.hpp>

#include <cstddef>
#include <vector>

namespace nsgeo {

struct KrigingResult {
  std::vector<Point> targets;
  std::vector<double> predictions;
  std::vector<double> sd;  // prediction standard deviations, >= 0
};

/// Global kriging by default; a k-nearest moving neighborhood kicks in beyond
/// max_global data points (or always, when force_knn is set).
struct NeighborhoodPolicy {
  std::size_t max_global = 2000;
  std::size_t k = 64;
  bool force_knn = false;
};

/// Simple kriging with spatially varying mean: prediction m(s0) + eta^T (Y - m)
/// with eta = C^{-1} C0 and variance Q(s0) = sigma^2(s0) - C0^T C^{-1} C0.
/// One factorization is shared across all targets in the global path. Singular
/// systems (duplicated observations) receive one diagonal jitter, then fail.
KrigingResult krige(const Dataset& data, const std::vector<Point>& targets, const NsModel& model,
                    const NeighborhoodPolicy& policy = {});

/// Kriging under the nested stationary baseline (constant mean).
KrigingResult krige_baseline(const Dataset& data, const std::vector<Point>& targets,
                             const StationaryBaseline& model,
                             const NeighborhoodPolicy& policy = {});

}  // namespace nsgeo
