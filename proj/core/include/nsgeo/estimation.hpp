#pragma once

#include <nsgeo/covariance.hpp>
#include <nsgeo/variogram.hpp>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace nsgeo {

/// Fitted local parameters theta(x0) = (sigma, lambda1, lambda2, psi) at an
/// anchor point. converged reports optimizer convergence; at_bound marks
/// solutions pinned to a parameter-box edge (e.g. flat pure-noise variograms
/// driving the ranges to their lower bound).
struct LocalFit {
  Point x0;
  double sigma = 1.0;
  AnisotropyParams aniso;
  double objective = 0.0;
  bool converged = false;
  bool at_bound = false;
};

/// Parameter box for the local WLS fit, derived from the data scale:
/// lambda in [1e-3, 10] x domain diameter, sigma^2 in [1e-6, 10] x data variance.
struct FitBounds {
  double lambda_lo = 1e-3;
  double lambda_hi = 10.0;
  double sigma_lo = 1e-3;
  double sigma_hi = 10.0;

  static FitBounds from_data(const Dataset& data);
};

/// Weighted local least squares over theta: minimizes the Euclidean norm of
/// w_eps(x0) (.) (gamma(theta) - gamma_hat(x0)) with gamma(h; theta) =
/// sigma^2 (1 - R^S(sqrt(h^T Sigma^{-1} h))). Bounded Nelder-Mead with
/// multi-starts; ranges log-parameterized, the angle unconstrained mod pi.
/// Requires >= 4 nonempty bins. The family's shape parameters must be local
/// constants (the pipeline fixes the scale a = 1).
LocalFit fit_local(const LocalVariogram& vario, const CorrelationFamily& family,
                   const FitBounds& bounds, std::uint64_t seed = 1, std::size_t multistarts = 5,
                   std::size_t max_evals = 2000);

/// Local stationary kriging of the mean over the neighbors within b of x0,
/// with the variogram implied by the local fit under the given family.
/// Singular systems get one 1e-10 * sill diagonal jitter, then fall back to a
/// kernel-weighted average. Throws when the neighborhood is empty.
double krige_local_mean(const Dataset& data, Point x0, const LocalFit& fit, double b,
                        const CorrelationFamily& family = ExponentialFamily{1.0});

/// Nadaraya-Watson weights with the isotropic Gaussian kernel.
std::vector<double> nw_weights(const std::vector<Point>& anchors, Point x0, double delta);

/// Nadaraya-Watson smoothing of a scalar parameter; a convex combination of
/// the raw anchor values.
double smooth_scalar(const std::vector<Point>& anchors, const std::vector<double>& raw_values,
                     Point x0, double delta);

struct OrientationEstimate {
  double psi = 0.0;
  bool tie = false;  // two global minima (antipodal configuration); smaller angle returned
};

/// Orientation smoothing: argmin over psi0 of sum_k W_k(x0) d^2(psi0, psi_k)
/// with the axial distance d. Attains the minimum within 1e-6 rad.
OrientationEstimate smooth_orientation(const std::vector<Point>& anchors,
                                       const std::vector<double>& raw_psis, Point x0, double delta);

/// Raw anchor estimates plus the kernel-smoothed evaluator of all parameter
/// fields. The same smoothing bandwidth delta applies to every parameter.
class ParameterField {
 public:
  ParameterField(std::vector<Point> anchors, std::vector<LocalFit> fits, std::vector<double> means,
                 double delta);

  const std::vector<Point>& anchors() const { return anchors_; }
  const std::vector<LocalFit>& fits() const { return fits_; }
  const std::vector<double>& means() const { return means_; }
  double delta() const { return delta_; }

  double mean_at(Point p) const;
  double sigma_at(Point p) const;
  AnisotropyParams anisotropy_at(Point p) const;

  /// Non-stationary model with fields backed by this parameter set (shared
  /// ownership; the returned model remains valid on its own).
  NsModel to_model(const CorrelationFamily& family) const;

 private:
  std::vector<Point> anchors_;
  std::vector<LocalFit> fits_;
  std::vector<double> means_;
  std::vector<double> sigmas_;
  std::vector<double> lambda1_;
  std::vector<double> lambda2_;
  std::vector<double> psis_;
  double delta_;
};

/// Knobs of the anchor-estimation stage.
struct EstimationConfig {
  CorrelationFamily family = ExponentialFamily{1.0};
  std::size_t anchor_nx = 12;
  std::size_t anchor_ny = 12;
  std::size_t n_directions = 4;  // 0 = isotropic lag classes
  std::size_t distance_classes = 10;
  RadiusPolicy radius_policy = RadiusPolicy::sd_match;
  std::size_t multistarts = 5;
  std::size_t max_evals = 2000;
  std::uint64_t seed = 1;
};

struct AnchorEstimates {
  double epsilon = 0.0;
  double b = 0.0;  // quasi-stationarity radius used
  std::vector<Point> anchors;
  std::vector<LocalFit> fits;
  std::vector<double> means;
  std::vector<std::string> warnings;
};

/// Fits theta and kriges the local mean at a regular anchor grid over the data
/// bounding box. Anchors where estimation is impossible (all bins empty, no
/// neighbors within b) are dropped with a warning.
AnchorEstimates estimate_at_anchors(const Dataset& data, double epsilon,
                                    const EstimationConfig& config);

/// Leave-one-out bandwidth selection for the smoothing parameter delta
/// applied to all parameter fields; first minimum on ties. Requires >= 3
/// anchors and >= 1 candidate.
double select_delta(const std::vector<Point>& anchors, const std::vector<double>& raw_values,
                    const std::vector<double>& candidates);

struct EpsilonSelection {
  double epsilon = 0.0;
  std::vector<double> candidates;
  std::vector<double> scores;  // LOO MSE per candidate; NaN where the pipeline failed
  std::vector<std::string> warnings;
};

/// Leave-one-out cross-validation over the bandwidth grid: for each candidate
/// the full estimate -> smooth -> krige pipeline is run and scored by the LOO
/// mean squared prediction error. Candidates where the pipeline fails are
/// excluded with a warning. delta_grid selects the smoothing bandwidth per
/// candidate (empty: anchor spacing).
EpsilonSelection select_epsilon(const Dataset& data, const std::vector<double>& candidates,
                                const EstimationConfig& config,
                                const std::vector<double>& delta_grid = {});

}  // namespace nsgeo
