#pragma once

#include <nsgeo/geometry.hpp>

namespace nsgeo {

/// Local geometric anisotropy in canonical form: lambda1 >= lambda2 > 0 are the
/// ranges along the major/minor axes, psi in [0, pi) is the azimuth of the
/// major axis. psi and psi + pi describe the same orientation and canonicalize
/// identically; for isotropic parameters (lambda1 == lambda2) psi is set to 0.
struct AnisotropyParams {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double psi = 0.0;

  AnisotropyParams() = default;
  AnisotropyParams(double lambda1_, double lambda2_, double psi_);
};

/// Reduces an angle to the axial range [0, pi).
double wrap_axial(double angle);

/// Axial distance between two orientations: min(|d|, |d - pi|, |d + pi|).
double orientation_distance(double psi_a, double psi_b);

/// Symmetric positive definite 2x2 matrix, stored as (a11, a12, a22).
class SpdMatrix {
 public:
  SpdMatrix() : a11_(1.0), a12_(0.0), a22_(1.0) {}
  SpdMatrix(double a11, double a12, double a22);

  double a11() const { return a11_; }
  double a12() const { return a12_; }
  double a22() const { return a22_; }

  double det() const { return a11_ * a22_ - a12_ * a12_; }
  double trace() const { return a11_ + a22_; }

  SpdMatrix inverse() const;

  /// h^T A h
  double quad(Point h) const {
    return a11_ * h.x * h.x + 2.0 * a12_ * h.x * h.y + a22_ * h.y * h.y;
  }

  /// (A + B) / 2, SPD by convexity.
  friend SpdMatrix average(const SpdMatrix& a, const SpdMatrix& b) {
    return SpdMatrix(0.5 * (a.a11_ + b.a11_), 0.5 * (a.a12_ + b.a12_), 0.5 * (a.a22_ + b.a22_));
  }

  friend bool operator==(const SpdMatrix& a, const SpdMatrix& b) {
    return a.a11_ == b.a11_ && a.a12_ == b.a12_ && a.a22_ == b.a22_;
  }

 private:
  double a11_, a12_, a22_;
};

/// Spectral composition Sigma = Psi diag(lambda1^2, lambda2^2) Psi^T.
SpdMatrix params_to_matrix(const AnisotropyParams& p);

/// Inverse of params_to_matrix, canonical form (lambda1 >= lambda2, psi in [0, pi),
/// psi = 0 when the eigenvalue gap is below 1e-12 relative).
AnisotropyParams matrix_to_params(const SpdMatrix& m);

/// Prefactor |Sx|^{1/4} |Sy|^{1/4} |(Sx+Sy)/2|^{-1/2}; symmetric, in (0, 1],
/// equals 1 iff Sx == Sy.
double phi(const SpdMatrix& sx, const SpdMatrix& sy);

/// Q_xy(h) = h^T ((Sx+Sy)/2)^{-1} h; nonnegative, 0 iff h = 0.
double q_form(const SpdMatrix& sx, const SpdMatrix& sy, Point h);

}  // namespace nsgeo
