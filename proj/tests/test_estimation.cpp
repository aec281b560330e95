#include <nsgeo/estimation.hpp>

#include <nsgeo/simulation.hpp>

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"

using namespace nsgeo;
namespace ts = testsupport;

namespace {

constexpr double kPi = std::numbers::pi;

// Variogram bins filled exactly from a model, bypassing any estimation noise.
LocalVariogram exact_variogram(const AnisotropyParams& aniso, double sigma,
                               const CorrelationFamily& family, double b) {
  const SpdMatrix inv = params_to_matrix(aniso).inverse();
  LocalVariogram v;
  v.x0 = {0.0, 0.0};
  v.lags = directional_lags(4, 8, b);
  const std::size_t n = v.lags.size();
  v.gamma.resize(n);
  v.weights.assign(n, 1.0);
  v.pair_counts.assign(n, 50);
  v.nonempty.assign(n, true);
  for (std::size_t j = 0; j < n; ++j) {
    const double tau = std::sqrt(inv.quad(v.lags.lags[j].h));
    v.gamma[j] = sigma * sigma * (1.0 - stationary_correlation(family, tau));
  }
  return v;
}

FitBounds wide_bounds() {
  FitBounds b;
  b.lambda_lo = 0.01;
  b.lambda_hi = 50.0;
  b.sigma_lo = 0.01;
  b.sigma_hi = 20.0;
  return b;
}

}  // namespace

TEST_SUITE("estimation") {

TEST_CASE("fit_local recovers exact synthetic parameters") {
  const AnisotropyParams truth(2.0, 1.0, kPi / 4.0);
  const CorrelationFamily family = ExponentialFamily{1.0};
  const LocalVariogram v = exact_variogram(truth, 1.5, family, 6.0);
  const LocalFit fit = fit_local(v, family, wide_bounds(), 7);
  CHECK(fit.objective < 1e-6);
  CHECK(fit.sigma == doctest::Approx(1.5).epsilon(1e-3));
  CHECK(fit.aniso.lambda1 == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(fit.aniso.lambda2 == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(orientation_distance(fit.aniso.psi, kPi / 4.0) < 1e-3);
  CHECK(fit.converged);
}

TEST_CASE("fit_local: isotropic truth canonicalizes psi to 0") {
  const AnisotropyParams truth(1.4, 1.4, 1.0);
  const CorrelationFamily family = ExponentialFamily{1.0};
  const LocalVariogram v = exact_variogram(truth, 1.0, family, 5.0);
  const LocalFit fit = fit_local(v, family, wide_bounds(), 12);
  CHECK(fit.aniso.lambda1 == doctest::Approx(fit.aniso.lambda2).epsilon(5e-3));
  // Near-isotropic solutions carry no meaningful azimuth; the canonical tie
  // rule maps exact ties to 0.
  const AnisotropyParams canon =
      matrix_to_params(params_to_matrix(AnisotropyParams(fit.aniso.lambda1, fit.aniso.lambda1, fit.aniso.psi)));
  CHECK(canon.psi == 0.0);
}

TEST_CASE("fit_local: flat pure-noise variogram hits the range floor, flagged") {
  const CorrelationFamily family = ExponentialFamily{1.0};
  LocalVariogram v = exact_variogram(AnisotropyParams(1, 1, 0), 1.0, family, 5.0);
  std::fill(v.gamma.begin(), v.gamma.end(), 2.0);  // flat at level c = 2
  const LocalFit fit = fit_local(v, family, wide_bounds(), 3);
  CHECK(fit.sigma * fit.sigma == doctest::Approx(2.0).epsilon(0.02));
  CHECK(fit.aniso.lambda2 == doctest::Approx(wide_bounds().lambda_lo).epsilon(0.05));
  CHECK(fit.at_bound);
}

TEST_CASE("fit_local requires 4 nonempty bins") {
  const CorrelationFamily family = ExponentialFamily{1.0};
  LocalVariogram v = exact_variogram(AnisotropyParams(1, 1, 0), 1.0, family, 5.0);
  std::fill(v.nonempty.begin(), v.nonempty.end(), false);
  v.nonempty[0] = v.nonempty[1] = v.nonempty[2] = true;
  CHECK_THROWS_AS(fit_local(v, family, wide_bounds()), std::invalid_argument);
}

TEST_CASE("scale consistency: values scaled by c scale sigma, ranges and psi fixed") {
  std::mt19937_64 eng(20240815);
  const std::vector<Point> pts = ts::scatter(eng, 120, 0.0, 10.0);
  NsModel model;
  model.family = ExponentialFamily{1.0};
  model.anisotropy = constant_field(AnisotropyParams(2.0, 1.0, 0.6));
  const std::vector<double> base = unconditional_simulate(model, pts, 31, {0, true});

  const double c = 3.0;
  std::vector<double> scaled = base;
  for (double& v : scaled) v *= c;

  const Dataset d1(pts, base);
  const Dataset d2(pts, scaled);
  const LagSystem lags = directional_lags(4, 8, 5.0);
  const Point x0{5.0, 5.0};
  const LocalVariogram v1 = local_variogram(d1, x0, 3.0, lags);
  const LocalVariogram v2 = local_variogram(d2, x0, 3.0, lags);
  const LocalFit f1 = fit_local(v1, model.family, FitBounds::from_data(d1), 5);
  const LocalFit f2 = fit_local(v2, model.family, FitBounds::from_data(d2), 5);

  CHECK(f2.sigma == doctest::Approx(c * f1.sigma).epsilon(1e-6));
  CHECK(f2.aniso.lambda1 == doctest::Approx(f1.aniso.lambda1).epsilon(1e-6));
  CHECK(f2.aniso.lambda2 == doctest::Approx(f1.aniso.lambda2).epsilon(1e-6));
  CHECK(orientation_distance(f2.aniso.psi, f1.aniso.psi) < 1e-6);
}

TEST_CASE("translation equivariance of anchor estimates") {
  std::mt19937_64 eng(77);
  const std::vector<Point> pts = ts::scatter(eng, 80, 0.0, 8.0);
  NsModel model;
  model.family = ExponentialFamily{1.0};
  model.anisotropy = constant_field(AnisotropyParams(1.5, 0.8, 0.3));
  const std::vector<double> vals = unconditional_simulate(model, pts, 21, {0, true});

  const Point shift{13.0, -7.0};
  std::vector<Point> moved = pts;
  for (Point& p : moved) p = p + shift;

  EstimationConfig config;
  config.anchor_nx = 4;
  config.anchor_ny = 4;
  config.seed = 5;
  const AnchorEstimates a = estimate_at_anchors(Dataset(pts, vals), 2.5, config);
  const AnchorEstimates b = estimate_at_anchors(Dataset(moved, vals), 2.5, config);
  REQUIRE(a.anchors.size() == b.anchors.size());
  for (std::size_t k = 0; k < a.anchors.size(); ++k) {
    CHECK(b.anchors[k].x == doctest::Approx(a.anchors[k].x + shift.x).epsilon(1e-12));
    CHECK(b.anchors[k].y == doctest::Approx(a.anchors[k].y + shift.y).epsilon(1e-12));
    CHECK(b.fits[k].sigma == doctest::Approx(a.fits[k].sigma).epsilon(1e-9));
    CHECK(b.fits[k].aniso.lambda1 == doctest::Approx(a.fits[k].aniso.lambda1).epsilon(1e-9));
    CHECK(b.means[k] == doctest::Approx(a.means[k]).epsilon(1e-9));
  }
}

TEST_CASE("krige_local_mean: constants, single neighbor, weight normalization") {
  LocalFit fit;
  fit.sigma = 1.2;
  fit.aniso = AnisotropyParams(1.0, 1.0, 0.0);

  const Dataset consts({{0, 0}, {1, 0}, {0, 1}}, {5.0, 5.0, 5.0});
  CHECK(krige_local_mean(consts, {0.4, 0.4}, fit, 3.0) == doctest::Approx(5.0).epsilon(1e-12));

  const Dataset one({{0, 0}, {10, 10}}, {7.0, -3.0});
  CHECK(krige_local_mean(one, {0.1, 0.1}, fit, 1.0) == doctest::Approx(7.0));

  CHECK_THROWS_AS(krige_local_mean(one, {5.0, 5.0}, fit, 0.5), std::runtime_error);
}

TEST_CASE("krige_local_mean matches a hand-solved 3x3 system") {
  // Three collinear equidistant points, exponential variogram with known theta.
  LocalFit fit;
  fit.sigma = 1.5;
  fit.aniso = AnisotropyParams(2.0, 2.0, 0.0);
  const Dataset data({{0, 0}, {1, 0}, {2, 0}}, {1.0, 3.0, 2.0});

  const auto gamma = [&](double dist) {
    return fit.sigma * fit.sigma * (1.0 - std::exp(-dist / 2.0));
  };
  Eigen::Matrix3d g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = gamma(std::abs(i - j));
  const Eigen::Vector3d beta = g.partialPivLu().solve(Eigen::Vector3d::Ones());
  const Eigen::Vector3d alpha = beta / beta.sum();
  const double expected = alpha[0] * 1.0 + alpha[1] * 3.0 + alpha[2] * 2.0;

  CHECK(krige_local_mean(data, {1.0, 0.0}, fit, 5.0) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("smooth_scalar: exactness, symmetry, hand-computed weights") {
  CHECK(smooth_scalar({{1, 1}}, {4.2}, {0, 0}, 0.5) == doctest::Approx(4.2));
  CHECK(smooth_scalar({{-1, 0}, {1, 0}}, {1.0, 3.0}, {0, 0}, 0.7) == doctest::Approx(2.0));

  std::mt19937_64 eng(9);
  const std::vector<Point> anchors = ts::scatter(eng, 5, 0.0, 2.0);
  const std::vector<double> vals = {0.2, -1.0, 3.0, 0.7, 2.2};
  const Point x0{1.0, 1.0};
  const double delta = 0.7;
  double wsum = 0.0, num = 0.0;
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const double d = distance(anchors[k], x0) / delta;
    const double w = std::exp(-0.5 * d * d);
    wsum += w;
    num += w * vals[k];
  }
  CHECK(smooth_scalar(anchors, vals, x0, delta) == doctest::Approx(num / wsum).epsilon(1e-12));

  // Convex combination: inside the value range.
  const double s = smooth_scalar(anchors, vals, {0.3, 1.7}, 0.4);
  CHECK(s >= -1.0);
  CHECK(s <= 3.0);
}

TEST_CASE("smooth_orientation: constants and wrap-around mean") {
  const std::vector<Point> anchors = {{0, 0}, {1, 0}};
  CHECK(smooth_orientation(anchors, {0.9, 0.9}, {0.5, 0}, 1.0).psi == doctest::Approx(0.9));

  // {0.1, pi - 0.1} with equal weights averages across the wrap, not to pi/2.
  const OrientationEstimate e =
      smooth_orientation({{-1, 0}, {1, 0}}, {0.1, kPi - 0.1}, {0, 0}, 1.0);
  CHECK(orientation_distance(e.psi, 0.0) < 1e-6);
}

TEST_CASE("smooth_orientation is invariant to psi replaced by psi +/- pi") {
  std::mt19937_64 eng(13);
  const std::vector<Point> anchors = ts::scatter(eng, 4, 0.0, 2.0);
  const std::vector<double> psis = {0.2, 1.1, 2.8, 0.6};
  std::vector<double> shifted = psis;
  shifted[1] += kPi;
  shifted[3] -= kPi;
  const Point x0{0.8, 0.8};
  const double a = smooth_orientation(anchors, psis, x0, 0.9).psi;
  const double b = smooth_orientation(anchors, shifted, x0, 0.9).psi;
  CHECK(orientation_distance(a, b) < 1e-7);
}

TEST_CASE("smooth_orientation matches the exhaustive grid oracle") {
  const std::vector<Point> anchors = {{0, 0}, {2, 0}, {0.5, 1.5}};
  const std::vector<double> psis = {0.3, 2.9, 1.4};
  const Point x0{0.6, 0.4};
  const double delta = 0.8;
  const OrientationEstimate est = smooth_orientation(anchors, psis, x0, delta);

  const std::vector<double> w = nw_weights(anchors, x0, delta);
  const auto objective = [&](double psi0) {
    double f = 0.0;
    for (std::size_t k = 0; k < psis.size(); ++k) {
      const double d = orientation_distance(psi0, psis[k]);
      f += w[k] * d * d;
    }
    return f;
  };
  double best = 0.0, best_val = objective(0.0);
  for (int i = 1; i < 1000000; ++i) {
    const double a = kPi * static_cast<double>(i) / 1000000.0;
    const double v = objective(a);
    if (v < best_val) {
      best_val = v;
      best = a;
    }
  }
  CHECK(orientation_distance(est.psi, best) < 1e-5);
  CHECK(objective(est.psi) <= best_val + 1e-12);
}

TEST_CASE("smooth_orientation: antipodal tie returns the smaller angle, flagged") {
  const OrientationEstimate e =
      smooth_orientation({{-1, 0}, {1, 0}}, {0.0, kPi / 2.0}, {0, 0}, 1.0);
  CHECK(e.tie);
  CHECK(e.psi == doctest::Approx(kPi / 4.0).epsilon(1e-6));
}

TEST_CASE("ParameterField: delta -> 0 reproduces raw values at anchors") {
  std::vector<Point> anchors = {{0, 0}, {2, 0}, {0, 2}, {2, 2}};
  std::vector<LocalFit> fits(4);
  std::vector<double> means = {1.0, 2.0, 3.0, 4.0};
  for (std::size_t k = 0; k < 4; ++k) {
    fits[k].x0 = anchors[k];
    fits[k].sigma = 0.5 + static_cast<double>(k);
    fits[k].aniso = AnisotropyParams(1.0 + static_cast<double>(k) * 0.2, 1.0, 0.1);
  }
  const ParameterField field(anchors, fits, means, 0.01);
  CHECK(field.mean_at(anchors[2]) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(field.sigma_at(anchors[1]) == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(field.anisotropy_at(anchors[3]).lambda1 == doctest::Approx(1.6).epsilon(1e-9));

  const ParameterField wide(anchors, fits, means, 1.0);
  const NsModel model = wide.to_model(ExponentialFamily{1.0});
  CHECK(model.sigma(anchors[1]) > 0.0);
  CHECK(model.mean({1.0, 1.0}) == doctest::Approx(2.5).epsilon(1e-9));  // symmetric center
}

TEST_CASE("select_delta: trend + noise picks an interior bandwidth") {
  std::mt19937_64 eng(20240816);
  std::normal_distribution<double> noise(0.0, 0.15);
  std::vector<Point> anchors;
  std::vector<double> raw;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      const Point p{static_cast<double>(i), static_cast<double>(j)};
      anchors.push_back(p);
      raw.push_back(0.5 * p.x + 0.2 * p.y + noise(eng));
    }
  }
  const std::vector<double> grid = {0.05, 0.5, 1.0, 2.0, 8.0};
  const double chosen = select_delta(anchors, raw, grid);
  CHECK(chosen > grid.front());
  CHECK(chosen < grid.back());
}

TEST_CASE("select_delta: deterministic first-minimum tie-break and preconditions") {
  const std::vector<Point> anchors = {{0, 0}, {1, 0}, {2, 0}};
  const std::vector<double> raw = {1.0, 2.0, 1.5};
  const std::vector<double> dup = {0.7, 0.7, 0.7};
  CHECK(select_delta(anchors, raw, dup) == 0.7);
  CHECK_THROWS_AS(select_delta({{0, 0}, {1, 1}}, {1.0, 2.0}, {0.5}), std::invalid_argument);
}

TEST_CASE("select_epsilon: single candidate returned unchanged") {
  std::mt19937_64 eng(1);
  const std::vector<Point> pts = ts::scatter(eng, 12, 0.0, 4.0);
  std::vector<double> vals(12, 0.0);
  std::normal_distribution<double> gauss;
  for (double& v : vals) v = gauss(eng);
  EstimationConfig config;
  const EpsilonSelection sel = select_epsilon(Dataset(pts, vals), {1.25}, config);
  CHECK(sel.epsilon == 1.25);
}

TEST_CASE("select_epsilon: tiny bandwidth loses to a moderate one") {
  std::mt19937_64 eng(20240817);
  const std::vector<Point> pts = ts::scatter(eng, 70, 0.0, 10.0);
  NsModel model;
  model.family = ExponentialFamily{1.0};
  model.anisotropy = constant_field(AnisotropyParams(1.5, 1.5, 0.0));
  model.mean = constant_field(2.0);
  std::vector<double> vals = unconditional_simulate(model, pts, 8, {0, true});

  EstimationConfig config;
  config.anchor_nx = 5;
  config.anchor_ny = 5;
  config.n_directions = 0;  // isotropic truth
  config.seed = 3;
  const std::vector<double> candidates = {0.18, 2.5};
  const EpsilonSelection sel = select_epsilon(Dataset(pts, vals), candidates, config);
  CHECK(sel.epsilon != candidates.front());
}

}  // TEST_SUITE
