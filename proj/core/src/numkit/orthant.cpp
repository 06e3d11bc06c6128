#include "abba/numkit/orthant.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "abba/numkit/normal.hpp"

namespace abba::numkit {

Correlation2::Correlation2(double rho) : rho_(rho) {
  if (!(std::abs(rho) < 1.0)) {
    throw std::domain_error("correlation must satisfy |rho| < 1, got " + std::to_string(rho));
  }
}

Cov2::Cov2(double sigma1, Correlation2 rho) : sigma1_(sigma1), rho_(rho) {
  if (!(sigma1 > 0.0) || !std::isfinite(sigma1)) {
    throw std::domain_error("sigma1 must be positive and finite, got " + std::to_string(sigma1));
  }
}

double Cov2::determinant() const noexcept {
  const double r = rho_.value();
  return sigma1_ * sigma1_ * kSigma2 * kSigma2 * (1.0 - r * r);
}

namespace {

constexpr int kPanelNodes = 64;

struct GaussLegendre64 {
  std::array<double, kPanelNodes> x{};
  std::array<double, kPanelNodes> w{};

  GaussLegendre64() {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    const int n = kPanelNodes;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = 0.0;
        for (int j = 1; j <= n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double step = p0 / dp;
        z -= step;
        if (std::abs(step) < 1e-16) break;
      }
      x[i] = -z;
      x[n - 1 - i] = z;
      w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre64& gauss_legendre_64() {
  static const GaussLegendre64 rule;
  return rule;
}

template <class F>
double panel(const F& f, double lo, double hi) {
  const auto& gl = gauss_legendre_64();
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double sum = 0.0;
  for (int i = 0; i < kPanelNodes; ++i) sum += gl.w[i] * f(mid + half * gl.x[i]);
  return sum * half;
}

template <class F>
double adaptive(const F& f, double lo, double hi, double whole, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double left = panel(f, lo, mid);
  const double right = panel(f, mid, hi);
  if (depth <= 0 || std::abs(left + right - whole) <= 1e-14) return left + right;
  return adaptive(f, lo, mid, left, depth - 1) + adaptive(f, mid, hi, right, depth - 1);
}

// Half-rules of the 6, 12 and 20 point Gauss-Legendre formulas on [-1, 1].
constexpr std::array<double, 3> kW6 = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
constexpr std::array<double, 3> kX6 = {0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
constexpr std::array<double, 6> kW12 = {0.04717533638651177, 0.1069393259953183,
                                        0.1600783285433464,  0.2031674267230659,
                                        0.2334925365383547,  0.2491470458134029};
constexpr std::array<double, 6> kX12 = {0.9815606342467191, 0.9041172563704750,
                                        0.7699026741943050, 0.5873179542866171,
                                        0.3678314989981802, 0.1252334085114692};
constexpr std::array<double, 10> kW20 = {
    0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475,
    0.1019301198172404,  0.1181945319615184,  0.1316886384491766,  0.1420961093183821,
    0.1491729864726037,  0.1527533871307259};
constexpr std::array<double, 10> kX20 = {
    0.9931285991850949, 0.9639719272779138, 0.9122344282513259, 0.8391169718222188,
    0.7463319064601508, 0.6360536807265150, 0.5108670019508271, 0.3737060887154196,
    0.2277858511416451, 0.07652652113349733};

struct HalfRule {
  const double* w;
  const double* x;
  std::size_t n;
};

HalfRule rule_for(double abs_r) {
  if (abs_r < 0.3) return {kW6.data(), kX6.data(), kW6.size()};
  if (abs_r < 0.75) return {kW12.data(), kX12.data(), kW12.size()};
  return {kW20.data(), kX20.data(), kW20.size()};
}

// Upper orthant by integrating phi(z) Phi((r z - o) / s) outward from the larger threshold m.
// All terms are positive and the normal cdf is evaluated in its lower tail, so the result keeps
// full relative accuracy where the series above only has absolute accuracy.
double tail_orthant(double m, double o, double r) {
  const double s = std::sqrt(1.0 - r * r);
  const auto f = [&](double z) { return std_normal_pdf(z) * std_normal_cdf((r * z - o) / s); };
  // The log integrand falls at least m / 2 per unit beyond m; a few e-folds per 20-point panel.
  const double half = 3.0 / (1.0 + std::abs(m));
  double sum = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double mid = m + half * (2 * i + 1);
    double part = 0.0;
    for (std::size_t j = 0; j < kW20.size(); ++j) part += kW20[j] * (f(mid - half * kX20[j]) + f(mid + half * kX20[j]));
    part *= half;
    sum += part;
    if (i > 1 && part <= 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

double std_bvn_upper(double h, double k, double r) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (h == kInf || k == kInf) return 0.0;
  if (h == -kInf) return k == -kInf ? 1.0 : std_normal_cdf(-k);
  if (k == -kInf) return std_normal_cdf(-h);
  if (r == 0.0) return std_normal_cdf(-h) * std_normal_cdf(-k);

  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double h0 = h, k0 = k;
  const HalfRule rule = rule_for(std::abs(r));
  double hk = h * k;
  double bvn = 0.0;

  if (std::abs(r) < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = 0.5 * std::asin(r);
    for (std::size_t i = 0; i < rule.n; ++i) {
      for (const double x : {1.0 - rule.x[i], 1.0 + rule.x[i]}) {
        const double sn = std::sin(asr * x);
        bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    bvn = bvn * asr / two_pi + std_normal_cdf(-h) * std_normal_cdf(-k);
  } else {
    if (r < 0.0) {
      k = -k;
      hk = -hk;
    }
    if (std::abs(r) < 1.0) {
      const double as = 1.0 - r * r;
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 80.0;
      double asr = -0.5 * (bs / as + hk);
      if (asr > -100.0) {
        bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
      }
      if (hk > -100.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(two_pi) * std_normal_cdf(-b / a);
        bvn -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
      }
      a *= 0.5;
      double sum = 0.0;
      for (std::size_t i = 0; i < rule.n; ++i) {
        for (const double x : {1.0 - rule.x[i], 1.0 + rule.x[i]}) {
          const double xs = (a * x) * (a * x);
          asr = -0.5 * (bs / xs + hk);
          if (asr <= -100.0) continue;
          const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
          const double rs = std::sqrt(1.0 - xs);
          const double ep = std::exp(-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
          sum += rule.w[i] * std::exp(asr) * (sp - ep);
        }
      }
      bvn = (a * sum - bvn) / two_pi;
    }
    if (r > 0.0) {
      bvn += std_normal_cdf(-std::max(h, k));
    } else if (h >= k) {
      bvn = -bvn;
    } else {
      const double gap = h < 0.0 ? std_normal_cdf(k) - std_normal_cdf(h)
                                 : std_normal_cdf(-h) - std_normal_cdf(-k);
      bvn = gap - bvn;
    }
  }
  if (bvn < 1e-9) return tail_orthant(std::max(h0, k0), std::min(h0, k0), r);
  return std::clamp(bvn, 0.0, 1.0);
}

double bvn_upper_orthant(double mu1, double mu2, const Cov2& cov, double a, double b) {
  return std_bvn_upper((a - mu1) / cov.sigma1(), (b - mu2) / cov.sigma2(), cov.rho());
}

double bvn_upper_orthant_quadrature(double mu1, double mu2, const Cov2& cov, double a, double b) {
  // P = int_{h}^{inf} phi(z) * Phi((rho z - k) / sqrt(1 - rho^2)) dz, truncated where phi < 1e-23.
  constexpr double kReach = 10.0;
  const double h = (a - mu1) / cov.sigma1();
  const double k = (b - mu2) / cov.sigma2();
  const double r = cov.rho();
  if (std::isnan(h) || std::isnan(k)) return std::numeric_limits<double>::quiet_NaN();
  if (h >= kReach || k == std::numeric_limits<double>::infinity()) return 0.0;
  if (k == -std::numeric_limits<double>::infinity()) return std_normal_cdf(-h);
  const double s = std::sqrt(1.0 - r * r);
  const auto integrand = [&](double z) {
    return std_normal_pdf(z) * std_normal_cdf((r * z - k) / s);
  };
  const double lo = std::max(h, -kReach);
  const double whole = panel(integrand, lo, kReach);
  return std::clamp(adaptive(integrand, lo, kReach, whole, 12), 0.0, 1.0);
}

}  // namespace abba::numkit
