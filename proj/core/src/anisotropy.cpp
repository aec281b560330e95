#include <nsgeo/anisotropy.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nsgeo {

namespace {
constexpr double kPi = std::numbers::pi;
// Eigenvalue gap below this (relative) is treated as isotropic: psi = 0.
constexpr double kIsotropicTie = 1e-12;
}  // namespace

double wrap_axial(double angle) {
  double a = std::fmod(angle, kPi);
  if (a < 0.0) a += kPi;
  if (a >= kPi) a = 0.0;  // fmod rounding at the seam
  return a;
}

double orientation_distance(double psi_a, double psi_b) {
  const double d = std::abs(psi_a - psi_b);
  return std::min({d, std::abs(d - kPi), std::abs(d + kPi)});
}

AnisotropyParams::AnisotropyParams(double lambda1_, double lambda2_, double psi_)
    : lambda1(lambda1_), lambda2(lambda2_), psi(wrap_axial(psi_)) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
    throw std::invalid_argument("AnisotropyParams: ranges must be positive");
  if (lambda1 < lambda2) {
    std::swap(lambda1, lambda2);
    psi = wrap_axial(psi + kPi / 2.0);
  }
  if (lambda1 - lambda2 <= kIsotropicTie * lambda1) psi = 0.0;
}

SpdMatrix::SpdMatrix(double a11, double a12, double a22) : a11_(a11), a12_(a12), a22_(a22) {
  if (!(det() > 0.0) || !(trace() > 0.0))
    throw std::invalid_argument("SpdMatrix: matrix is not positive definite");
}

SpdMatrix SpdMatrix::inverse() const {
  const double d = det();
  return SpdMatrix(a22_ / d, -a12_ / d, a11_ / d);
}

SpdMatrix params_to_matrix(const AnisotropyParams& p) {
  const double c = std::cos(p.psi);
  const double s = std::sin(p.psi);
  const double l1 = p.lambda1 * p.lambda1;
  const double l2 = p.lambda2 * p.lambda2;
  // Psi columns (c, -s), (s, c): major eigenvector at angle psi.
  return SpdMatrix(c * c * l1 + s * s * l2, c * s * (l1 - l2), s * s * l1 + c * c * l2);
}

AnisotropyParams matrix_to_params(const SpdMatrix& m) {
  const double tr = m.trace();
  const double gap = std::sqrt(std::max(0.0, (m.a11() - m.a22()) * (m.a11() - m.a22()) +
                                                 4.0 * m.a12() * m.a12()));
  const double e1 = 0.5 * (tr + gap);
  const double e2 = 0.5 * (tr - gap);
  if (!(e2 > 0.0)) throw std::invalid_argument("matrix_to_params: matrix is not positive definite");
  if (gap <= kIsotropicTie * e1) {
    const double l = std::sqrt(0.5 * tr);
    return AnisotropyParams(l, l, 0.0);
  }
  // Major eigenvector of [[a11, a12], [a12, a22]] for eigenvalue e1.
  double vx, vy;
  if (std::abs(m.a12()) > 0.0) {
    vx = e1 - m.a22();
    vy = m.a12();
  } else if (m.a11() >= m.a22()) {
    vx = 1.0;
    vy = 0.0;
  } else {
    vx = 0.0;
    vy = 1.0;
  }
  return AnisotropyParams(std::sqrt(e1), std::sqrt(e2), std::atan2(vy, vx));
}

double phi(const SpdMatrix& sx, const SpdMatrix& sy) {
  const SpdMatrix avg = average(sx, sy);
  const double davg = avg.det();
  if (!(davg > 0.0)) throw std::invalid_argument("phi: singular average matrix");
  return std::pow(sx.det(), 0.25) * std::pow(sy.det(), 0.25) / std::sqrt(davg);
}

double q_form(const SpdMatrix& sx, const SpdMatrix& sy, Point h) {
  return average(sx, sy).inverse().quad(h);
}

}  // namespace nsgeo
