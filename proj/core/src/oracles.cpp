#include <nsgeo/oracles.hpp>

#include <nsgeo/parallel.hpp>
#include <nsgeo/rng.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace nsgeo {

namespace {

constexpr double kPi = std::numbers::pi;
using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;

// Log-density of the w = t^2 mixture integrand, excluding exp(-Q/w):
//   Gamma-type    w^{shape-1} * scale_factor * e^{-rate w}
//   InvGamma-type w^{-shape-1} * scale_factor * e^{-inv_rate / w}
struct MixtureMeasure {
  enum class Kind { gamma_type, inv_gamma_type } kind;
  double shape;
  double rate;     // gamma: rate on w; inv-gamma: numerator of e^{-rate/w}
  double log_norm; // log of the constant factor
};

// Per-family w-space measures, exactly as they fall out of the corollaries.
// For varying-order families the constants must NOT be normalized away: they
// differ between the (x,y), (x,x) and (y,y) integrals and produce the
// Gamma-ratio prefactors.
MixtureMeasure mixture_measure(const CorrelationFamily& family, double pair_shape) {
  const double a = family_scale(family);
  if (std::holds_alternative<ExponentialFamily>(family)) {
    // (1/(2a sqrt(pi))) w^{-1/2} e^{-w/(4a^2)}
    return {MixtureMeasure::Kind::gamma_type, 0.5, 1.0 / (4.0 * a * a),
            -std::log(2.0 * a * std::sqrt(kPi))};
  }
  if (const auto* m = std::get_if<MaternFamily>(&family)) {
    const double beta = 1.0 / (4.0 * a * a);
    if (!m->nu_field) {
      // Gamma(nu, rate beta) density
      return {MixtureMeasure::Kind::gamma_type, pair_shape, beta,
              pair_shape * std::log(beta) - std::lgamma(pair_shape)};
    }
    // w^{nubar-1} * beta * e^{-beta w}
    return {MixtureMeasure::Kind::gamma_type, pair_shape, beta, std::log(beta)};
  }
  if (const auto* c = std::get_if<CauchyFamily>(&family)) {
    if (!c->alpha_field) {
      // InvGamma(alpha, a^2) density
      return {MixtureMeasure::Kind::inv_gamma_type, pair_shape, a * a,
              pair_shape * std::log(a * a) - std::lgamma(pair_shape)};
    }
    // a^2 * w^{-alphabar-1} * e^{-a^2/w}
    return {MixtureMeasure::Kind::inv_gamma_type, pair_shape, a * a, std::log(a * a)};
  }
  throw std::invalid_argument("quadrature_oracle: family has no mixture measure");
}

double pair_shape_at(const CorrelationFamily& family, Point x, Point y) {
  if (const auto* m = std::get_if<MaternFamily>(&family)) return matern_pair_order(*m, x, y);
  if (const auto* c = std::get_if<CauchyFamily>(&family)) return cauchy_pair_exponent(*c, x, y);
  return 0.0;
}

// Integration bounds in v = log w, placed where the truncated measure mass is
// below ~1e-12 on each side.
std::pair<double, double> log_bounds(const MixtureMeasure& m) {
  if (m.kind == MixtureMeasure::Kind::gamma_type) {
    const double s = m.shape;
    const double w_hi = (s + 12.0 * std::sqrt(s) + 60.0) / m.rate;
    const double log_w_lo = (std::log(1e-14) + std::lgamma(s + 1.0)) / s - std::log(m.rate);
    return {log_w_lo, std::log(w_hi)};
  }
  const double s = m.shape;
  const double w_lo = m.rate / (s + 12.0 * std::sqrt(s) + 60.0);
  const double log_w_hi = (std::log(1e14) - std::lgamma(s + 1.0)) / s + std::log(m.rate);
  return {std::log(w_lo), log_w_hi};
}

struct IntegralEstimate {
  double value;
  double error;
};

// I(Q) = int_0^inf measure(w) exp(-Q/w) dw, integrated in v = log w.
IntegralEstimate mixture_integral(const MixtureMeasure& m, double q) {
  const auto [v_lo, v_hi] = log_bounds(m);
  const auto integrand = [&](double v) {
    const double w = std::exp(v);
    double log_f = m.log_norm + v;  // + v from dw = w dv
    if (m.kind == MixtureMeasure::Kind::gamma_type)
      log_f += (m.shape - 1.0) * v - m.rate * w;
    else
      log_f += (-m.shape - 1.0) * v - m.rate / w;
    log_f -= q / w;
    if (log_f > 700.0) throw std::overflow_error("quadrature_oracle: integrand overflow");
    return log_f < -745.0 ? 0.0 : std::exp(log_f);
  };
  double err = 0.0;
  const double value = Quad::integrate(integrand, v_lo, v_hi, 12, 1e-10, &err);
  return {value, err};
}

double gauss_cdf_upper(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

}  // namespace

QuadratureResult quadrature_oracle(Point x, Point y, const NsModel& model) {
  const SpdMatrix sx = params_to_matrix(model.anisotropy(x));
  const SpdMatrix sy = params_to_matrix(model.anisotropy(y));
  const double q_xy = q_form(sx, sy, x - y);

  double n_xy, n_xx, n_yy;
  double worst_rel = 0.0;
  if (std::holds_alternative<GaussianFamily>(model.family)) {
    // Point-mass bandwidth measure: the mixture is the integrand at t = a.
    const double a2 = family_scale(model.family) * family_scale(model.family);
    n_xy = std::exp(-q_xy / a2) / std::sqrt(average(sx, sy).det());
    n_xx = 1.0 / std::sqrt(sx.det());
    n_yy = 1.0 / std::sqrt(sy.det());
  } else {
    const auto eval = [&](Point px, Point py, const SpdMatrix& mx, const SpdMatrix& my, double q) {
      const MixtureMeasure m = mixture_measure(model.family, pair_shape_at(model.family, px, py));
      const IntegralEstimate est = mixture_integral(m, q);
      if (est.value > 0.0) worst_rel = std::max(worst_rel, est.error / est.value);
      return est.value / std::sqrt(average(mx, my).det());
    };
    n_xy = eval(x, y, sx, sy, q_xy);
    n_xx = eval(x, x, sx, sx, 0.0);
    n_yy = eval(y, y, sy, sy, 0.0);
  }

  QuadratureResult out;
  out.rel_error = worst_rel;
  out.converged = worst_rel < 1e-6 && n_xx > 0.0 && n_yy > 0.0;
  out.correlation = n_xy / std::sqrt(n_xx * n_yy);
  out.covariance = model.sigma(x) * model.sigma(y) * out.correlation;
  return out;
}

Lemma1Result lemma1_check(Point x, Point y, const SpdMatrix& sx, const SpdMatrix& sy, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("lemma1_check: t must be positive");

  const SpdMatrix avg = average(sx, sy);
  const double q = q_form(sx, sy, x - y);
  Lemma1Result out;
  out.closed_form = std::exp(-q / (t * t)) / (kPi * t * t * std::sqrt(avg.det()));

  // Gaussian kernel densities with covariance (t^2/4) S.
  const auto density = [t](Point center, const SpdMatrix& s) {
    const SpdMatrix cov(t * t / 4.0 * s.a11(), t * t / 4.0 * s.a12(), t * t / 4.0 * s.a22());
    const double det = cov.det();
    const SpdMatrix inv = cov.inverse();
    const double norm_c = 1.0 / (2.0 * kPi * std::sqrt(det));
    return [center, inv, norm_c](Point u) {
      return norm_c * std::exp(-0.5 * inv.quad(u - center));
    };
  };
  const auto kx = density(x, sx);
  const auto ky = density(y, sy);

  // Box covering both kernels out to 9 standard deviations of the wider one.
  const auto max_eig = [](const SpdMatrix& s) {
    const double tr = s.trace();
    return 0.5 * (tr + std::sqrt(std::max(tr * tr - 4.0 * s.det(), 0.0)));
  };
  const double reach = 9.0 * 0.5 * t * std::sqrt(std::max(max_eig(sx), max_eig(sy)));
  const double x_lo = std::min(x.x, y.x) - reach, x_hi = std::max(x.x, y.x) + reach;
  const double y_lo = std::min(x.y, y.y) - reach, y_hi = std::max(x.y, y.y) + reach;

  const auto inner = [&](double ux) {
    return Quad::integrate([&](double uy) { return kx({ux, uy}) * ky({ux, uy}); }, y_lo, y_hi, 10,
                           1e-10);
  };
  out.numeric = Quad::integrate(inner, x_lo, x_hi, 10, 1e-9);
  return out;
}

std::vector<McPairEstimate> convolution_mc_oracle(const NsModel& model, const Grid& grid,
                                                  const std::vector<std::pair<Point, Point>>& pairs,
                                                  std::size_t n_realizations, std::uint64_t seed) {
  const auto* gaussian = std::get_if<GaussianFamily>(&model.family);
  if (gaussian == nullptr)
    throw std::invalid_argument(
        "convolution_mc_oracle: only the Gaussian (point-mass bandwidth) family is supported");
  if (n_realizations < 2) throw std::invalid_argument("convolution_mc_oracle: need >= 2 realizations");
  const double a = gaussian->a;

  // Unique evaluation points.
  std::vector<Point> points;
  std::vector<std::pair<std::size_t, std::size_t>> pair_idx;
  const auto point_id = [&](Point p) -> std::size_t {
    for (std::size_t i = 0; i < points.size(); ++i)
      if (points[i] == p) return i;
    points.push_back(p);
    return points.size() - 1;
  };
  pair_idx.reserve(pairs.size());
  for (const auto& [px, py] : pairs) pair_idx.emplace_back(point_id(px), point_id(py));

  // Sparse kernel weights per evaluation point (cells within 4 sd), scaled so
  // that white-noise cells can be drawn as unit normals.
  const double cell_area = grid.dx * grid.dy;
  const double sqrt_area = std::sqrt(cell_area);
  struct SparseWeights {
    std::vector<std::size_t> cells;
    std::vector<double> w;
    double norm = 1.0;  // sqrt of the theoretical raw variance
  };
  std::vector<SparseWeights> weights(points.size());

  const double gx_lo = grid.origin.x, gx_hi = grid.origin.x + (grid.nx - 1) * grid.dx;
  const double gy_lo = grid.origin.y, gy_hi = grid.origin.y + (grid.ny - 1) * grid.dy;

  for (std::size_t p = 0; p < points.size(); ++p) {
    const Point c = points[p];
    const SpdMatrix s = params_to_matrix(model.anisotropy(c));
    const SpdMatrix kcov(a * a / 4.0 * s.a11(), a * a / 4.0 * s.a12(), a * a / 4.0 * s.a22());
    const SpdMatrix kinv = kcov.inverse();
    const double knorm = 1.0 / (2.0 * kPi * std::sqrt(kcov.det()));

    // Kernel mass escaping the grid, by the per-axis union bound.
    const double sdx = std::sqrt(kcov.a11());
    const double sdy = std::sqrt(kcov.a22());
    const double mass_out = gauss_cdf_upper((c.x - gx_lo) / sdx) + gauss_cdf_upper((gx_hi - c.x) / sdx) +
                            gauss_cdf_upper((c.y - gy_lo) / sdy) + gauss_cdf_upper((gy_hi - c.y) / sdy);
    if (mass_out > 0.01)
      throw std::runtime_error("convolution_mc_oracle: insufficient grid coverage at point (" +
                               std::to_string(c.x) + ", " + std::to_string(c.y) + ")");

    SparseWeights sw;
    for (std::size_t j = 0; j < grid.ny; ++j) {
      for (std::size_t i = 0; i < grid.nx; ++i) {
        const Point u = grid.node(i, j);
        const double maha2 = kinv.quad(u - c);
        if (maha2 > 16.0) continue;  // 4 sd truncation
        sw.cells.push_back(grid.index(i, j));
        sw.w.push_back(knorm * std::exp(-0.5 * maha2) * sqrt_area);
      }
    }
    sw.norm = std::sqrt(1.0 / (kPi * a * a * std::sqrt(s.det())));
    weights[p] = std::move(sw);
  }

  // Scores per realization, one independent stream per realization index.
  std::vector<std::vector<double>> scores(points.size(),
                                          std::vector<double>(n_realizations, 0.0));
  parallel_for(n_realizations, [&](std::size_t r) {
    std::mt19937_64 eng = rng::engine(seed, "mc-oracle", r);
    std::normal_distribution<double> gauss;
    std::vector<double> noise(grid.size());
    for (double& g : noise) g = gauss(eng);
    for (std::size_t p = 0; p < points.size(); ++p) {
      double acc = 0.0;
      const auto& sw = weights[p];
      for (std::size_t k = 0; k < sw.cells.size(); ++k) acc += sw.w[k] * noise[sw.cells[k]];
      scores[p][r] = model.sigma(points[p]) * acc / sw.norm;
    }
  });

  std::vector<double> means(points.size(), 0.0);
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (double v : scores[p]) means[p] += v;
    means[p] /= static_cast<double>(n_realizations);
  }

  std::vector<McPairEstimate> out;
  out.reserve(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [pi, pj] = pair_idx[k];
    double cov = 0.0, var_prod = 0.0;
    for (std::size_t r = 0; r < n_realizations; ++r) {
      const double prod = (scores[pi][r] - means[pi]) * (scores[pj][r] - means[pj]);
      cov += prod;
      var_prod += prod * prod;
    }
    const double nr = static_cast<double>(n_realizations);
    cov /= nr - 1.0;
    var_prod = var_prod / (nr - 1.0) - cov * cov;
    out.push_back({pairs[k].first, pairs[k].second, cov,
                   std::sqrt(std::max(var_prod, 0.0) / nr)});
  }
  return out;
}

}  // namespace nsgeo
