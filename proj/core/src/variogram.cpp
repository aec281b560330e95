#include <nsgeo/variogram.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nsgeo {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kEmptyMass = 1e-12;

double axial_angle_diff(Point u, Point v) {
  // Pairs are unordered, so directions are axial: compare modulo pi.
  const double a = std::atan2(u.y, u.x);
  const double b = std::atan2(v.y, v.x);
  double d = std::fmod(std::abs(a - b), kPi);
  return std::min(d, kPi - d);
}
}  // namespace

Dataset::Dataset(std::vector<Point> locations_, std::vector<double> values_)
    : locations(std::move(locations_)), values(std::move(values_)) {
  if (locations.size() != values.size())
    throw std::invalid_argument("Dataset: locations and values lengths differ");
  for (std::size_t i = 0; i < locations.size(); ++i)
    for (std::size_t j = i + 1; j < locations.size(); ++j)
      if (distance(locations[i], locations[j]) < 1e-9 && values[i] != values[j])
        throw std::invalid_argument("Dataset: duplicated location with conflicting values");
}

LagSystem isotropic_lags(std::size_t j_classes, double b) {
  if (j_classes < 1 || !(b > 0.0)) throw std::invalid_argument("isotropic_lags: bad arguments");
  const double width = b / static_cast<double>(j_classes);
  LagSystem out;
  out.lags.reserve(j_classes);
  for (std::size_t j = 0; j < j_classes; ++j) {
    const double r = (static_cast<double>(j) + 0.5) * width;
    out.lags.push_back({{r, 0.0}, 0.5 * width, kPi});  // angle_tol >= pi/2: any direction
  }
  return out;
}

LagSystem directional_lags(std::size_t n_directions, std::size_t j_classes, double b,
                           double angle_tol) {
  if (n_directions < 1) return isotropic_lags(j_classes, b);
  if (j_classes < 1 || !(b > 0.0) || !(angle_tol > 0.0))
    throw std::invalid_argument("directional_lags: bad arguments");
  const double width = b / static_cast<double>(j_classes);
  LagSystem out;
  out.lags.reserve(n_directions * j_classes);
  for (std::size_t d = 0; d < n_directions; ++d) {
    const double az = kPi * static_cast<double>(d) / static_cast<double>(n_directions);
    for (std::size_t j = 0; j < j_classes; ++j) {
      const double r = (static_cast<double>(j) + 0.5) * width;
      out.lags.push_back({{r * std::cos(az), r * std::sin(az)}, 0.5 * width, angle_tol});
    }
  }
  return out;
}

std::size_t LocalVariogram::nonempty_count() const {
  std::size_t n = 0;
  for (bool b : nonempty) n += b ? 1 : 0;
  return n;
}

LocalVariogram local_variogram(const Dataset& data, Point x0, double epsilon, const LagSystem& lags,
                               VariogramKernel kernel) {
  if (data.size() == 0) throw std::invalid_argument("local_variogram: empty dataset");
  if (!(epsilon > 0.0)) throw std::invalid_argument("local_variogram: epsilon must be positive");
  for (const LagBin& bin : lags.lags)
    if (!(norm(bin.h) > 0.0) || !(bin.dist_tol > 0.0))
      throw std::invalid_argument("local_variogram: degenerate lag bin");

  const std::size_t n = data.size();

  // Standardized kernel weights K*(x0, s_i) = K(x0, s_i) / sum_l K(x0, s_l).
  std::vector<double> kw(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = distance(x0, data.locations[i]);
    double k = 1.0;
    switch (kernel) {
      case VariogramKernel::gaussian:
        k = std::exp(-0.5 * d * d / (epsilon * epsilon));
        break;
      case VariogramKernel::constant:
        k = 1.0;
        break;
      case VariogramKernel::indicator:
        k = d < epsilon ? 1.0 : 0.0;
        break;
    }
    kw[i] = k;
    total += k;
  }
  if (!(total > 0.0)) throw std::runtime_error("local_variogram: zero kernel mass at anchor");
  for (double& k : kw) k /= total;

  const std::size_t n_bins = lags.size();
  LocalVariogram out;
  out.x0 = x0;
  out.lags = lags;
  out.gamma.assign(n_bins, 0.0);
  out.weights.assign(n_bins, 0.0);
  out.pair_counts.assign(n_bins, 0);
  out.nonempty.assign(n_bins, false);

  std::vector<double> num(n_bins, 0.0);
  std::vector<double> mass(n_bins, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point d = data.locations[i] - data.locations[j];
      const double dist = norm(d);
      const double kk = kw[i] * kw[j];
      if (!(kk > 0.0)) continue;
      const double dy2 = (data.values[i] - data.values[j]) * (data.values[i] - data.values[j]);
      for (std::size_t b = 0; b < n_bins; ++b) {
        const LagBin& bin = lags.lags[b];
        if (std::abs(dist - norm(bin.h)) > bin.dist_tol) continue;
        if (bin.angle_tol < kPi / 2.0 && axial_angle_diff(d, bin.h) > bin.angle_tol) continue;
        num[b] += kk * dy2;
        mass[b] += kk;
        out.pair_counts[b] += 1;
      }
    }
  }

  bool any = false;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (mass[b] < kEmptyMass) continue;
    out.nonempty[b] = true;
    any = true;
    out.gamma[b] = num[b] / (2.0 * mass[b]);
    out.weights[b] = std::sqrt(mass[b] / norm(lags.lags[b].h));
  }
  if (!any) throw std::runtime_error("local_variogram: all lag bins empty at anchor");
  return out;
}

LocalVariogram matheron_variogram(const Dataset& data, const LagSystem& lags) {
  if (data.size() == 0) throw std::invalid_argument("matheron_variogram: empty dataset");
  return local_variogram(data, data.locations.front(), 1.0, lags, VariogramKernel::constant);
}

double neighborhood_radius(double epsilon, RadiusPolicy policy) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("neighborhood_radius: epsilon must be positive");
  switch (policy) {
    case RadiusPolicy::sd_match:
      return std::numbers::sqrt3 * epsilon;
    case RadiusPolicy::quantile:
      return 2.0 * epsilon;
    case RadiusPolicy::fwhm:
      return std::sqrt(2.0 * std::log(2.0)) * epsilon;
  }
  throw std::invalid_argument("neighborhood_radius: unknown policy");
}

}  // namespace nsgeo
