#include <nsgeo/covariance.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace nsgeo {

namespace {

constexpr double kMaxMaternOrder = 50.0;

double require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
  return v;
}

// Per-point model parameters, evaluated once when filling matrices.
struct LocalParams {
  SpdMatrix mat;
  double shape = 0.0;  // Matern order or Cauchy exponent at the point (0 if unused)
};

LocalParams local_params(const NsModel& model, Point p) {
  LocalParams out;
  out.mat = params_to_matrix(model.anisotropy(p));
  if (const auto* m = std::get_if<MaternFamily>(&model.family)) {
    out.shape = require_positive(m->nu_field ? (*m->nu_field)(p) : m->nu, "Matern order");
  } else if (const auto* c = std::get_if<CauchyFamily>(&model.family)) {
    out.shape = require_positive(c->alpha_field ? (*c->alpha_field)(p) : c->alpha, "Cauchy exponent");
  }
  return out;
}

// Correlation for a pair with pre-evaluated local parameters.
double pair_correlation(const CorrelationFamily& family, Point h, const LocalParams& px,
                        const LocalParams& py) {
  const double pf = phi(px.mat, py.mat);
  const double q = q_form(px.mat, py.mat, h);
  return std::visit(
      [&](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        const double a = require_positive(f.a, "scale a");
        if constexpr (std::is_same_v<F, GaussianFamily>) {
          return pf * std::exp(-q / (a * a));
        } else if constexpr (std::is_same_v<F, ExponentialFamily>) {
          return pf * std::exp(-std::sqrt(q) / a);
        } else if constexpr (std::is_same_v<F, MaternFamily>) {
          const double nbar = 0.5 * (px.shape + py.shape);
          const double gamma_ratio =
              px.shape == py.shape
                  ? 1.0
                  : std::exp(std::lgamma(nbar) - 0.5 * (std::lgamma(px.shape) + std::lgamma(py.shape)));
          return pf * gamma_ratio * matern_correlation(nbar, std::sqrt(q) / a);
        } else {
          const double abar = 0.5 * (px.shape + py.shape);
          const double gamma_ratio =
              px.shape == py.shape
                  ? 1.0
                  : std::exp(std::lgamma(abar) - 0.5 * (std::lgamma(px.shape) + std::lgamma(py.shape)));
          return pf * gamma_ratio * std::pow(1.0 + q / (a * a), -abar);
        }
      },
      family);
}

}  // namespace

double family_scale(const CorrelationFamily& family) {
  return std::visit([](const auto& f) { return f.a; }, family);
}

double matern_correlation(double nu, double tau) {
  if (!(nu > 0.0)) throw std::invalid_argument("matern_correlation: order must be positive");
  if (nu > kMaxMaternOrder)
    throw std::domain_error("matern_correlation: order beyond supported range (0, 50]");
  if (tau <= 0.0) return 1.0;
  // log of the small-argument leading term of K_nu; past ~600 the Bessel value
  // itself overflows and the correlation equals its quadratic expansion to
  // double precision.
  const double lead = std::lgamma(nu) - std::log(2.0) + nu * (std::log(2.0) - std::log(tau));
  if (lead > 600.0) {
    if (nu > 1.0) return 1.0 - tau * tau / (4.0 * (nu - 1.0));
    return 1.0;
  }
  const double k = std::cyl_bessel_k(nu, tau);
  if (!std::isfinite(k)) throw std::domain_error("matern_correlation: Bessel evaluation overflow");
  if (k <= 0.0) return 0.0;  // underflow at large tau
  const double log_rho =
      (1.0 - nu) * std::log(2.0) - std::lgamma(nu) + nu * std::log(tau) + std::log(k);
  return std::exp(log_rho);
}

double stationary_correlation(const CorrelationFamily& family, double tau) {
  if (tau < 0.0) throw std::invalid_argument("stationary_correlation: tau must be >= 0");
  return std::visit(
      [tau](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        const double a = require_positive(f.a, "scale a");
        if constexpr (std::is_same_v<F, GaussianFamily>) {
          return std::exp(-tau * tau / (a * a));
        } else if constexpr (std::is_same_v<F, ExponentialFamily>) {
          return std::exp(-tau / a);
        } else if constexpr (std::is_same_v<F, MaternFamily>) {
          if (f.nu_field)
            throw std::invalid_argument(
                "stationary_correlation: field-valued Matern order; pass the local constant");
          return matern_correlation(require_positive(f.nu, "Matern order"), tau / a);
        } else {
          if (f.alpha_field)
            throw std::invalid_argument(
                "stationary_correlation: field-valued Cauchy exponent; pass the local constant");
          const double alpha = require_positive(f.alpha, "Cauchy exponent");
          return std::pow(1.0 + tau * tau / (a * a), -alpha);
        }
      },
      family);
}

double matern_pair_order(const MaternFamily& family, Point x, Point y) {
  const double nx = require_positive(family.nu_field ? (*family.nu_field)(x) : family.nu, "Matern order");
  const double ny = require_positive(family.nu_field ? (*family.nu_field)(y) : family.nu, "Matern order");
  return 0.5 * (nx + ny);
}

double cauchy_pair_exponent(const CauchyFamily& family, Point x, Point y) {
  const double ax =
      require_positive(family.alpha_field ? (*family.alpha_field)(x) : family.alpha, "Cauchy exponent");
  const double ay =
      require_positive(family.alpha_field ? (*family.alpha_field)(y) : family.alpha, "Cauchy exponent");
  return 0.5 * (ax + ay);
}

double ns_correlation(Point x, Point y, const NsModel& model) {
  if (x == y) return 1.0;
  return pair_correlation(model.family, x - y, local_params(model, x), local_params(model, y));
}

double ns_covariance(Point x, Point y, const NsModel& model) {
  const double sx = require_positive(model.sigma(x), "sigma");
  if (x == y) return sx * sx;
  const double sy = require_positive(model.sigma(y), "sigma");
  return sx * sy * ns_correlation(x, y, model);
}

CachedCorrelation::CachedCorrelation(const NsModel& model, std::vector<Point> sites)
    : family_(model.family), sites_(std::move(sites)) {
  if (sites_.empty()) throw std::invalid_argument("CachedCorrelation: empty site list");
  sigma_.resize(sites_.size());
  params_.resize(sites_.size());
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const double s = model.sigma(sites_[i]);
    if (!(s >= 0.0) || !std::isfinite(s))
      throw std::invalid_argument("CachedCorrelation: sigma must be finite and >= 0");
    sigma_[i] = s;
    const LocalParams lp = local_params(model, sites_[i]);
    params_[i] = SiteParams{lp.mat, lp.shape};
  }
}

double CachedCorrelation::correlation(std::size_t i, std::size_t j) const {
  if (i == j) return 1.0;
  const LocalParams pi{params_[i].mat, params_[i].shape};
  const LocalParams pj{params_[j].mat, params_[j].shape};
  return pair_correlation(family_, sites_[i] - sites_[j], pi, pj);
}

Eigen::MatrixXd covariance_matrix(const std::vector<Point>& points, const NsModel& model) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n == 0) throw std::invalid_argument("covariance_matrix: empty point list");
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (distance(points[i], points[j]) < 1e-9)
        throw std::invalid_argument("covariance_matrix: duplicate points at indices " +
                                    std::to_string(i) + " and " + std::to_string(j));

  const CachedCorrelation cache(model, points);
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    c(i, i) = cache.sigma(ii) * cache.sigma(ii);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      c(i, j) = c(j, i) = cache.covariance(ii, jj);
    }
  }
  return c;
}

double StationaryBaseline::total_sill() const {
  double s = 0.0;
  for (const auto& structure : structures)
    s += std::visit([](const auto& st) { return st.sill; }, structure);
  return s;
}

double stationary_covariance(Point h, const StationaryBaseline& model) {
  double c = 0.0;
  for (const auto& structure : model.structures) {
    c += std::visit(
        [&](const auto& st) -> double {
          using S = std::decay_t<decltype(st)>;
          if (st.sill < 0.0) throw std::invalid_argument("stationary_covariance: negative sill");
          if constexpr (std::is_same_v<S, NuggetStructure>) {
            return norm(h) == 0.0 ? st.sill : 0.0;
          } else {
            const double tau = std::sqrt(params_to_matrix(st.ranges).inverse().quad(h));
            switch (st.profile) {
              case StationaryStructure::Profile::exponential:
                return st.sill * std::exp(-tau);
              case StationaryStructure::Profile::gaussian:
                return st.sill * std::exp(-tau * tau);
              case StationaryStructure::Profile::spherical:
                if (tau >= 1.0) return 0.0;
                return st.sill * (1.0 - 1.5 * tau + 0.5 * tau * tau * tau);
            }
            return 0.0;
          }
        },
        structure);
  }
  return c;
}

}  // namespace nsgeo
