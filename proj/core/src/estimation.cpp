#include <nsgeo/estimation.hpp>

#include <nsgeo/detail/nelder_mead.hpp>
#include <nsgeo/parallel.hpp>
#include <nsgeo/rng.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace nsgeo {

namespace {

constexpr double kPi = std::numbers::pi;

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 1.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

double golden_section(const std::function<double(double)>& f, double a, double b, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

FitBounds FitBounds::from_data(const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("FitBounds: empty dataset");
  const double diam = data.size() > 1 ? bounding_box(data.locations).diameter() : 1.0;
  const double var = std::max(sample_variance(data.values), 1e-30);
  FitBounds b;
  b.lambda_lo = 1e-3 * diam;
  b.lambda_hi = 10.0 * diam;
  b.sigma_lo = std::sqrt(1e-6 * var);
  b.sigma_hi = std::sqrt(10.0 * var);
  return b;
}

LocalFit fit_local(const LocalVariogram& vario, const CorrelationFamily& family,
                   const FitBounds& bounds, std::uint64_t seed, std::size_t multistarts,
                   std::size_t max_evals) {
  std::vector<std::size_t> active;
  for (std::size_t b = 0; b < vario.lags.size(); ++b)
    if (vario.nonempty[b]) active.push_back(b);
  if (active.size() < 4)
    throw std::invalid_argument("fit_local: need >= 4 nonempty bins for 4 free parameters");

  // u = (log sigma, log lambda_a, log lambda_b, psi); the ranges stay
  // unordered during optimization, canonicalization happens at the end.
  const auto objective = [&](const Eigen::VectorXd& u) {
    const double sigma2 = std::exp(2.0 * u[0]);
    const SpdMatrix inv =
        params_to_matrix(AnisotropyParams(std::exp(u[1]), std::exp(u[2]), u[3])).inverse();
    double ss = 0.0;
    for (std::size_t b : active) {
      const double tau = std::sqrt(inv.quad(vario.lags.lags[b].h));
      const double model_gamma = sigma2 * (1.0 - stationary_correlation(family, tau));
      const double r = vario.weights[b] * (model_gamma - vario.gamma[b]);
      ss += r * r;
    }
    return std::sqrt(ss);
  };

  Eigen::VectorXd lo(4), hi(4), step(4);
  lo << std::log(bounds.sigma_lo), std::log(bounds.lambda_lo), std::log(bounds.lambda_lo),
      -std::numeric_limits<double>::infinity();
  hi << std::log(bounds.sigma_hi), std::log(bounds.lambda_hi), std::log(bounds.lambda_hi),
      std::numeric_limits<double>::infinity();
  step << 0.5, 0.5, 0.5, kPi / 4.0;

  // Moment start: sill from the far-lag bins, ranges at a third of the reach.
  double max_h = 0.0;
  for (std::size_t b : active) max_h = std::max(max_h, norm(vario.lags.lags[b].h));
  double far_sum = 0.0;
  std::size_t far_n = 0;
  for (std::size_t b : active) {
    if (norm(vario.lags.lags[b].h) >= 2.0 / 3.0 * max_h) {
      far_sum += vario.gamma[b];
      ++far_n;
    }
  }
  const double sill0 = far_n > 0 ? std::max(far_sum / static_cast<double>(far_n), 1e-30)
                                 : std::max(vario.gamma[active[0]], 1e-30);

  Eigen::VectorXd start0(4);
  start0 << 0.5 * std::log(sill0), std::log(std::max(max_h / 3.0, bounds.lambda_lo)),
      std::log(std::max(max_h / 3.0, bounds.lambda_lo)), 0.0;

  detail::NelderMeadResult best;
  bool any_converged = false;
  for (std::size_t s = 0; s < std::max<std::size_t>(multistarts, 1); ++s) {
    Eigen::VectorXd start = start0;
    if (s > 0) {
      // Random starts drawn in normalized box coordinates, data-independent.
      std::mt19937_64 eng = rng::engine(seed, "fit-multistart", s);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (int d = 0; d < 3; ++d) start[d] = lo[d] + unit(eng) * (hi[d] - lo[d]);
      start[3] = unit(eng) * kPi;
    }
    const auto run = detail::nelder_mead(objective, start, lo, hi, step,
                                         std::max<std::size_t>(max_evals, 16), 1e-10);
    any_converged = any_converged || run.converged;
    if (run.value < best.value) best = run;
  }

  LocalFit fit;
  fit.x0 = vario.x0;
  fit.sigma = std::exp(best.x[0]);
  fit.aniso = AnisotropyParams(std::exp(best.x[1]), std::exp(best.x[2]), wrap_axial(best.x[3]));
  fit.objective = best.value;
  fit.converged = any_converged;
  const auto near_edge = [](double u, double edge) { return std::abs(u - edge) <= 1e-6; };
  for (int d = 0; d < 3; ++d)
    fit.at_bound = fit.at_bound || near_edge(best.x[d], lo[d]) || near_edge(best.x[d], hi[d]);
  return fit;
}

double krige_local_mean(const Dataset& data, Point x0, const LocalFit& fit, double b,
                        const CorrelationFamily& family) {
  if (!(b > 0.0)) throw std::invalid_argument("krige_local_mean: b must be positive");
  std::vector<std::size_t> nbr;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (distance(data.locations[i], x0) <= b) nbr.push_back(i);
  if (nbr.empty()) throw std::runtime_error("krige_local_mean: empty neighborhood");
  if (nbr.size() == 1) return data.values[nbr[0]];

  const SpdMatrix inv = params_to_matrix(fit.aniso).inverse();
  const double sill = fit.sigma * fit.sigma;
  const auto gamma = [&](Point h) {
    const double tau = std::sqrt(inv.quad(h));
    return sill * (1.0 - stationary_correlation(family, tau));
  };

  const auto n = static_cast<Eigen::Index>(nbr.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = gamma(data.locations[nbr[static_cast<std::size_t>(i)]] -
                             data.locations[nbr[static_cast<std::size_t>(j)]]);
      g(i, j) = g(j, i) = v;
    }
  }

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const auto try_solve = [&](const Eigen::MatrixXd& m, Eigen::VectorXd& beta) {
    beta = m.partialPivLu().solve(ones);
    if (!beta.allFinite()) return false;
    const double resid = (m * beta - ones).cwiseAbs().maxCoeff();
    const double scale = m.cwiseAbs().maxCoeff() * beta.cwiseAbs().maxCoeff() + 1.0;
    if (resid > 1e-8 * scale) return false;
    return std::abs(beta.sum()) > 1e-300;
  };

  Eigen::VectorXd beta;
  bool ok = try_solve(g, beta);
  if (!ok) {
    Eigen::MatrixXd jittered = g;
    jittered.diagonal().array() += 1e-10 * sill;
    ok = try_solve(jittered, beta);
  }
  if (ok) {
    double num = 0.0;
    const double den = beta.sum();
    for (Eigen::Index i = 0; i < n; ++i)
      num += beta[i] * data.values[nbr[static_cast<std::size_t>(i)]];
    return num / den;
  }

  // Kernel-weighted average fallback (duplicate or near-duplicate neighbors).
  const double eps = b / std::numbers::sqrt3;
  double wsum = 0.0, vsum = 0.0;
  for (std::size_t i : nbr) {
    const double d = distance(data.locations[i], x0);
    const double w = std::exp(-0.5 * d * d / (eps * eps));
    wsum += w;
    vsum += w * data.values[i];
  }
  return vsum / wsum;
}

std::vector<double> nw_weights(const std::vector<Point>& anchors, Point x0, double delta) {
  if (anchors.empty()) throw std::invalid_argument("nw_weights: no anchors");
  if (!(delta > 0.0)) throw std::invalid_argument("nw_weights: delta must be positive");
  std::vector<double> w(anchors.size());
  double total = 0.0;
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const double d = distance(anchors[k], x0) / delta;
    w[k] = std::exp(-0.5 * d * d);
    total += w[k];
  }
  if (!(total > 0.0)) {
    // All kernels underflowed; fall back to the nearest anchor.
    std::size_t nearest = 0;
    for (std::size_t k = 1; k < anchors.size(); ++k)
      if (distance(anchors[k], x0) < distance(anchors[nearest], x0)) nearest = k;
    std::fill(w.begin(), w.end(), 0.0);
    w[nearest] = 1.0;
    return w;
  }
  for (double& x : w) x /= total;
  return w;
}

double smooth_scalar(const std::vector<Point>& anchors, const std::vector<double>& raw_values,
                     Point x0, double delta) {
  if (anchors.size() != raw_values.size())
    throw std::invalid_argument("smooth_scalar: size mismatch");
  const std::vector<double> w = nw_weights(anchors, x0, delta);
  double out = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) out += w[k] * raw_values[k];
  return out;
}

OrientationEstimate smooth_orientation(const std::vector<Point>& anchors,
                                       const std::vector<double>& raw_psis, Point x0,
                                       double delta) {
  if (anchors.size() != raw_psis.size())
    throw std::invalid_argument("smooth_orientation: size mismatch");
  const std::vector<double> w = nw_weights(anchors, x0, delta);

  const auto objective = [&](double psi0) {
    double f = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double d = orientation_distance(psi0, raw_psis[k]);
      f += w[k] * d * d;
    }
    return f;
  };

  // Doubled-angle average as one candidate, plus a coarse axial scan; the
  // objective is piecewise quadratic with possibly two global minima.
  double sx = 0.0, cx = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    sx += w[k] * std::sin(2.0 * raw_psis[k]);
    cx += w[k] * std::cos(2.0 * raw_psis[k]);
  }
  const double doubled = wrap_axial(0.5 * std::atan2(sx, cx));

  constexpr std::size_t kScan = 720;
  const double step = kPi / static_cast<double>(kScan);
  std::vector<double> candidates;
  candidates.push_back(doubled);
  std::size_t best_idx = 0;
  double best_val = objective(doubled);
  std::vector<double> scan(kScan);
  for (std::size_t i = 0; i < kScan; ++i) scan[i] = objective(static_cast<double>(i) * step);

  // Local minima of the scan, refined by golden section.
  for (std::size_t i = 0; i < kScan; ++i) {
    const double prev = scan[(i + kScan - 1) % kScan];
    const double next = scan[(i + 1) % kScan];
    if (scan[i] <= prev && scan[i] <= next) {
      const double center = static_cast<double>(i) * step;
      candidates.push_back(
          wrap_axial(golden_section(objective, center - step, center + step, 1e-9)));
    }
  }

  for (std::size_t c = 1; c < candidates.size(); ++c) {
    const double v = objective(candidates[c]);
    if (v < best_val - 0.0) {
      best_val = v;
      best_idx = c;
    }
  }

  OrientationEstimate out;
  out.psi = wrap_axial(candidates[best_idx]);
  // Tie: another refined minimum with the same objective but a genuinely
  // different orientation.
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (c == best_idx) continue;
    const double v = objective(candidates[c]);
    if (std::abs(v - best_val) <= 1e-10 * (1.0 + best_val) &&
        orientation_distance(candidates[c], out.psi) > 1e-6) {
      out.tie = true;
      out.psi = std::min(out.psi, wrap_axial(candidates[c]));
    }
  }
  return out;
}

ParameterField::ParameterField(std::vector<Point> anchors, std::vector<LocalFit> fits,
                               std::vector<double> means, double delta)
    : anchors_(std::move(anchors)), fits_(std::move(fits)), means_(std::move(means)), delta_(delta) {
  if (anchors_.empty() || anchors_.size() != fits_.size() || anchors_.size() != means_.size())
    throw std::invalid_argument("ParameterField: inconsistent anchor data");
  if (!(delta_ > 0.0)) throw std::invalid_argument("ParameterField: delta must be positive");
  sigmas_.reserve(fits_.size());
  lambda1_.reserve(fits_.size());
  lambda2_.reserve(fits_.size());
  psis_.reserve(fits_.size());
  for (const LocalFit& f : fits_) {
    sigmas_.push_back(f.sigma);
    lambda1_.push_back(f.aniso.lambda1);
    lambda2_.push_back(f.aniso.lambda2);
    psis_.push_back(f.aniso.psi);
  }
}

double ParameterField::mean_at(Point p) const { return smooth_scalar(anchors_, means_, p, delta_); }

double ParameterField::sigma_at(Point p) const {
  return smooth_scalar(anchors_, sigmas_, p, delta_);
}

AnisotropyParams ParameterField::anisotropy_at(Point p) const {
  const double l1 = smooth_scalar(anchors_, lambda1_, p, delta_);
  const double l2 = smooth_scalar(anchors_, lambda2_, p, delta_);
  const double psi = smooth_orientation(anchors_, psis_, p, delta_).psi;
  return AnisotropyParams(l1, l2, psi);
}

NsModel ParameterField::to_model(const CorrelationFamily& family) const {
  auto shared = std::make_shared<ParameterField>(*this);
  NsModel model;
  model.family = family;
  model.mean = [shared](Point p) { return shared->mean_at(p); };
  model.sigma = [shared](Point p) { return shared->sigma_at(p); };
  model.anisotropy = [shared](Point p) { return shared->anisotropy_at(p); };
  return model;
}

AnchorEstimates estimate_at_anchors(const Dataset& data, double epsilon,
                                    const EstimationConfig& config) {
  if (data.size() == 0) throw std::invalid_argument("estimate_at_anchors: empty dataset");
  if (!(epsilon > 0.0)) throw std::invalid_argument("estimate_at_anchors: epsilon must be positive");

  AnchorEstimates out;
  out.epsilon = epsilon;
  out.b = neighborhood_radius(epsilon, config.radius_policy);

  const LagSystem lags =
      config.n_directions > 0
          ? directional_lags(config.n_directions, config.distance_classes, out.b)
          : isotropic_lags(config.distance_classes, out.b);
  const FitBounds bounds = FitBounds::from_data(data);

  const Grid anchor_grid = grid_over(bounding_box(data.locations), config.anchor_nx, config.anchor_ny);
  const std::vector<Point> candidates = anchor_grid.nodes();

  struct Slot {
    bool ok = false;
    LocalFit fit;
    double mean = 0.0;
    std::string warning;
  };
  std::vector<Slot> slots(candidates.size());

  parallel_for(candidates.size(), [&](std::size_t k) {
    Slot& slot = slots[k];
    try {
      const LocalVariogram vario = local_variogram(data, candidates[k], epsilon, lags);
      slot.fit = fit_local(vario, config.family, bounds, rng::derive(config.seed, "anchor", k),
                           config.multistarts, config.max_evals);
      slot.mean = krige_local_mean(data, candidates[k], slot.fit, out.b, config.family);
      slot.ok = true;
    } catch (const std::exception& e) {
      slot.warning = "anchor (" + std::to_string(candidates[k].x) + ", " +
                     std::to_string(candidates[k].y) + ") dropped: " + e.what();
    }
  });

  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (slots[k].ok) {
      out.anchors.push_back(candidates[k]);
      out.fits.push_back(slots[k].fit);
      out.means.push_back(slots[k].mean);
    } else {
      out.warnings.push_back(slots[k].warning);
    }
  }
  if (out.anchors.empty()) throw std::runtime_error("estimate_at_anchors: no usable anchor points");
  return out;
}

double select_delta(const std::vector<Point>& anchors, const std::vector<double>& raw_values,
                    const std::vector<double>& candidates) {
  if (anchors.size() < 3) throw std::invalid_argument("select_delta: need >= 3 anchors");
  if (anchors.size() != raw_values.size())
    throw std::invalid_argument("select_delta: size mismatch");
  if (candidates.empty()) throw std::invalid_argument("select_delta: no candidates");

  double best_delta = candidates.front();
  double best_score = std::numeric_limits<double>::infinity();
  bool any_finite = false;
  for (const double delta : candidates) {
    if (!(delta > 0.0)) throw std::invalid_argument("select_delta: candidates must be positive");
    double score = 0.0;
    bool usable = true;
    for (std::size_t k = 0; k < anchors.size(); ++k) {
      const std::vector<double> w = nw_weights(anchors, anchors[k], delta);
      const double denom = 1.0 - w[k];
      if (!(denom > 0.0)) {
        usable = false;  // W_k(x_k) = 1: criterion undefined at this bandwidth
        break;
      }
      double smoothed = 0.0;
      for (std::size_t j = 0; j < anchors.size(); ++j) smoothed += w[j] * raw_values[j];
      const double r = (raw_values[k] - smoothed) / denom;
      score += r * r;
    }
    if (!usable) continue;
    score /= static_cast<double>(anchors.size());
    any_finite = true;
    if (score < best_score) {
      best_score = score;
      best_delta = delta;
    }
  }
  if (!any_finite)
    throw std::runtime_error("select_delta: criterion undefined for every candidate");
  return best_delta;
}

EpsilonSelection select_epsilon(const Dataset& data, const std::vector<double>& candidates,
                                const EstimationConfig& config,
                                const std::vector<double>& delta_grid) {
  if (candidates.empty()) throw std::invalid_argument("select_epsilon: no candidates");
  EpsilonSelection out;
  out.candidates = candidates;
  out.scores.assign(candidates.size(), std::numeric_limits<double>::quiet_NaN());
  if (candidates.size() == 1) {
    out.epsilon = candidates.front();
    return out;
  }
  if (data.size() < 10)
    throw std::invalid_argument("select_epsilon: need >= 10 observations for leave-one-out");

  const BoundingBox box = bounding_box(data.locations);
  const double anchor_dx =
      config.anchor_nx > 1 ? box.width() / static_cast<double>(config.anchor_nx - 1) : box.width();
  const double anchor_dy =
      config.anchor_ny > 1 ? box.height() / static_cast<double>(config.anchor_ny - 1) : box.height();
  const double default_delta = std::max({anchor_dx, anchor_dy, 1e-12});

  const auto n = static_cast<Eigen::Index>(data.size());
  const Eigen::Map<const Eigen::VectorXd> y(data.values.data(), n);

  for (std::size_t c = 0; c < candidates.size(); ++c) {
    try {
      const AnchorEstimates est = estimate_at_anchors(data, candidates[c], config);
      double delta = default_delta;
      if (!delta_grid.empty()) {
        std::vector<double> sigmas;
        sigmas.reserve(est.fits.size());
        for (const LocalFit& f : est.fits) sigmas.push_back(f.sigma);
        delta = select_delta(est.anchors, sigmas, delta_grid);
      }
      const ParameterField field(est.anchors, est.fits, est.means, delta);
      const NsModel model = field.to_model(config.family);

      Eigen::VectorXd mean(n);
      for (Eigen::Index i = 0; i < n; ++i)
        mean[i] = field.mean_at(data.locations[static_cast<std::size_t>(i)]);

      Eigen::MatrixXd cov = covariance_matrix(data.locations, model);
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (llt.info() != Eigen::Success) {
        cov.diagonal().array() += 1e-10 * cov.diagonal().mean();
        llt.compute(cov);
        if (llt.info() != Eigen::Success)
          throw std::runtime_error("covariance factorization failed");
      }

      // Leave-one-out residuals of simple kriging from the precision matrix:
      // y_i - yhat_{-i}(s_i) = (P r)_i / P_ii with r the centered data.
      const Eigen::MatrixXd prec =
          llt.solve(Eigen::MatrixXd::Identity(n, n));
      const Eigen::VectorXd pr = prec * (y - mean);
      double mse = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double r = pr[i] / prec(i, i);
        mse += r * r;
      }
      out.scores[c] = mse / static_cast<double>(n);
    } catch (const std::exception& e) {
      out.warnings.push_back("epsilon " + std::to_string(candidates[c]) +
                             " excluded: " + e.what());
    }
  }

  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (std::isnan(out.scores[c])) continue;
    if (out.scores[c] < best) {
      best = out.scores[c];
      out.epsilon = candidates[c];
      found = true;
    }
  }
  if (!found) throw std::runtime_error("select_epsilon: every candidate failed");
  return out;
}

}  // namespace nsgeo
