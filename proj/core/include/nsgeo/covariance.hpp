#pragma once

#include <nsgeo/anisotropy.hpp>
#include <nsgeo/fields.hpp>
#include <nsgeo/geometry.hpp>

#include <Eigen/Dense>

#include <optional>
#include <variant>
#include <vector>

namespace nsgeo {

// ---------------------------------------------------------------------------
// Correlation families
// ---------------------------------------------------------------------------

/// Families of isotropic correlation profiles generated by the Gaussian scale
/// mixture. The scale a is a model constant separate from the anisotropy; the
/// inference pipeline fixes a = 1 so the ranges live in the anisotropy matrix.
struct GaussianFamily {
  double a = 1.0;
};

struct ExponentialFamily {
  double a = 1.0;
};

/// Matern smoothness may vary spatially; a pair is evaluated at the average
/// order (nu(x) + nu(y)) / 2 with the matching Gamma-ratio prefactor.
struct MaternFamily {
  double a = 1.0;
  double nu = 1.5;
  std::optional<ScalarField> nu_field;  // overrides nu when set
};

/// Cauchy long-range-dependence exponent, constant or spatially varying.
struct CauchyFamily {
  double a = 1.0;
  double alpha = 1.0;
  std::optional<ScalarField> alpha_field;
};

using CorrelationFamily = std::variant<GaussianFamily, ExponentialFamily, MaternFamily, CauchyFamily>;

double family_scale(const CorrelationFamily& family);

/// Stationary isotropic correlation profile R^S(tau) of a family at constant
/// parameters (the form fitted inside a quasi-stationarity neighborhood).
/// Field-valued smoothness/exponent is rejected; pass the local constant instead.
double stationary_correlation(const CorrelationFamily& family, double tau);

/// Normalized Matern correlation 2^{1-nu}/Gamma(nu) tau^nu K_nu(tau); equals 1
/// at tau = 0. Supported for nu in (0, 50], tau >= 0; extreme orders raise
/// std::domain_error before the Bessel evaluation can overflow.
double matern_correlation(double nu, double tau);

/// Effective Matern order used for a pair: (nu(x) + nu(y)) / 2.
double matern_pair_order(const MaternFamily& family, Point x, Point y);
/// Effective Cauchy exponent for a pair: (alpha(x) + alpha(y)) / 2.
double cauchy_pair_exponent(const CauchyFamily& family, Point x, Point y);

// ---------------------------------------------------------------------------
// Non-stationary model
// ---------------------------------------------------------------------------

/// Full non-stationary second-order model: correlation family plus the
/// spatially varying mean, standard deviation and geometric anisotropy fields.
struct NsModel {
  CorrelationFamily family;
  ScalarField sigma = constant_field(1.0);
  ScalarField mean = constant_field(0.0);
  AnisotropyField anisotropy = constant_field(AnisotropyParams{});
};

/// Non-stationary correlation between two locations: phi_xy * R^S(sqrt(Q_xy))
/// for fixed-parameter families, with the Gamma-ratio prefactors when the
/// Matern order or Cauchy exponent varies. Exactly 1 at x == y.
double ns_correlation(Point x, Point y, const NsModel& model);

/// sigma(x) sigma(y) * ns_correlation(x, y).
double ns_covariance(Point x, Point y, const NsModel& model);

/// Pairwise evaluator over a fixed site list with the parameter fields
/// evaluated once per site. Storage is O(n); rows are computed on demand,
/// which is what the large-n simulation path relies on.
class CachedCorrelation {
 public:
  CachedCorrelation(const NsModel& model, std::vector<Point> sites);

  std::size_t size() const { return sites_.size(); }
  const std::vector<Point>& sites() const { return sites_; }

  double sigma(std::size_t i) const { return sigma_[i]; }
  double correlation(std::size_t i, std::size_t j) const;
  double covariance(std::size_t i, std::size_t j) const {
    return sigma_[i] * sigma_[j] * correlation(i, j);
  }

 private:
  struct SiteParams {
    SpdMatrix mat;
    double shape = 0.0;
  };
  CorrelationFamily family_;
  std::vector<Point> sites_;
  std::vector<double> sigma_;
  std::vector<SiteParams> params_;
};

/// Dense covariance matrix over a point list. Points must be distinct;
/// duplicates (within 1e-9) are rejected.
Eigen::MatrixXd covariance_matrix(const std::vector<Point>& points, const NsModel& model);

// ---------------------------------------------------------------------------
// Stationary baseline comparator
// ---------------------------------------------------------------------------

/// Nested stationary model used as the comparison baseline: a sum of nugget,
/// exponential, spherical and Gaussian structures with geometric anisotropy.
/// Each structure evaluates its profile at tau = sqrt(h^T Sigma^{-1} h) with
/// Sigma built from (ranges, azimuth); the spherical profile is valid here
/// because the baseline is stationary.
struct NuggetStructure {
  double sill = 0.0;
};

struct StationaryStructure {
  enum class Profile { exponential, spherical, gaussian };
  Profile profile = Profile::exponential;
  double sill = 1.0;
  AnisotropyParams ranges;  // lambda1/lambda2 = ranges, psi = azimuth
};

using BaselineStructure = std::variant<NuggetStructure, StationaryStructure>;

struct StationaryBaseline {
  std::vector<BaselineStructure> structures;
  double mean = 0.0;

  double total_sill() const;
};

/// Covariance of the nested baseline at lag h; value at h = 0 is the total sill.
double stationary_covariance(Point h, const StationaryBaseline& model);

}  // namespace nsgeo
