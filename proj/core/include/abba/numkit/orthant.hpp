#pragma once

namespace abba::numkit {

/// A 2x2 correlation; the matrix [[1, rho], [rho, 1]] is positive definite.
class Correlation2 {
 public:
  /// Throws std::domain_error unless |rho| < 1.
  explicit Correlation2(double rho);

  double value() const noexcept { return rho_; }

 private:
  double rho_;
};

/// Covariance of (Y1, Y2*): sd sigma1 for the continuous outcome, the latent sd pinned at 1.
class Cov2 {
 public:
  static constexpr double kSigma2 = 1.0;

  /// Throws std::domain_error unless sigma1 > 0 and finite.
  Cov2(double sigma1, Correlation2 rho);

  double sigma1() const noexcept { return sigma1_; }
  double sigma2() const noexcept { return kSigma2; }
  double rho() const noexcept { return rho_.value(); }
  double determinant() const noexcept;

 private:
  double sigma1_;
  Correlation2 rho_;
};

/// P(Y1 > a, Y2 > b) for (Y1, Y2) bivariate normal with means (mu1, mu2) and covariance cov.
/// Drezner-Wesolowsky/Genz series with Gauss-Legendre nodes; absolute error well below 1e-12.
/// Infinite thresholds are honoured.
double bvn_upper_orthant(double mu1, double mu2, const Cov2& cov, double a, double b);

/// Same probability computed independently: integrates phi(z1) * P(Y2 > b | z1) over the
/// standardized y1 half-line with adaptive 64-point Gauss-Legendre panels.
double bvn_upper_orthant_quadrature(double mu1, double mu2, const Cov2& cov, double a, double b);

/// Standardized upper orthant P(Z1 > h, Z2 > k) with correlation r.
double std_bvn_upper(double h, double k, double r);

}  // namespace abba::numkit
