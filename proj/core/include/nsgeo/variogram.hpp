#pragma once

#include <nsgeo/geometry.hpp>

#include <cstddef>
#include <vector>

namespace nsgeo {

/// Irregular observations (s_i, Y(s_i)). Locations closer than 1e-9 must carry
/// equal values; the loader averages duplicates before construction.
struct Dataset {
  std::vector<Point> locations;
  std::vector<double> values;

  Dataset() = default;
  Dataset(std::vector<Point> locations_, std::vector<double> values_);

  std::size_t size() const { return locations.size(); }
};

/// One lag class: nominal vector, distance tolerance and axial angle
/// tolerance. An angle tolerance >= pi/2 accepts every direction (isotropic).
struct LagBin {
  Point h;
  double dist_tol = 0.0;
  double angle_tol = 0.0;
};

struct LagSystem {
  std::vector<LagBin> lags;

  std::size_t size() const { return lags.size(); }
};

/// J isotropic distance classes with centers at (j - 1/2) * b / J and
/// tolerance half a class width.
LagSystem isotropic_lags(std::size_t j_classes, double b);

/// n_directions azimuth classes (starting at 0, evenly spaced over [0, pi))
/// crossed with J distance classes. Default angular tolerance is 22.5 deg.
LagSystem directional_lags(std::size_t n_directions, std::size_t j_classes, double b,
                           double angle_tol = 0.39269908169872414);

/// Kernel K_eps(x, y) used to localize the variogram. The constant kernel
/// degenerates to the Matheron estimator, the indicator kernel to the moving
/// window estimator.
enum class VariogramKernel { gaussian, constant, indicator };

/// Kernel-weighted local variogram at an anchor point. Bins whose kernel mass
/// falls below 1e-12 are flagged empty rather than reported as zero.
struct LocalVariogram {
  Point x0;
  LagSystem lags;
  std::vector<double> gamma;        // estimate per bin (variance units)
  std::vector<double> weights;      // WLS weights w_eps(h_j; x0)
  std::vector<std::size_t> pair_counts;
  std::vector<bool> nonempty;

  std::size_t nonempty_count() const;
};

/// Local variogram kernel estimator: for each bin, the standardized-kernel
/// weighted average of squared increments over pairs whose separation falls in
/// the bin's tolerance region. Throws when every bin is empty.
LocalVariogram local_variogram(const Dataset& data, Point x0, double epsilon, const LagSystem& lags,
                               VariogramKernel kernel = VariogramKernel::gaussian);

/// Classical Matheron moment estimator: the constant-kernel special case
/// (independent of x0 and epsilon).
LocalVariogram matheron_variogram(const Dataset& data, const LagSystem& lags);

/// Quasi-stationarity radius b derived from the kernel bandwidth.
enum class RadiusPolicy { sd_match, quantile, fwhm };
double neighborhood_radius(double epsilon, RadiusPolicy policy = RadiusPolicy::sd_match);

}  // namespace nsgeo
