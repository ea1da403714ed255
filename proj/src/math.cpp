#include "skoflow/math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace skoflow {

double erfcx(double x) {
  if (x < 0) {
    // erfcx(x) = 2 exp(x^2) - erfcx(-x); overflows near x < -26.6, callers
    // stay well inside that.
    return 2.0 * std::exp(x * x) - erfcx(-x);
  }
  if (x > 26.0) {
    // Asymptotic series 1/(x sqrt(pi)) (1 - 1/(2x^2) + 3/(4x^4) - ...).
    const double ix2 = 1.0 / (x * x);
    const double s =
        1.0 + ix2 * (-0.5 + ix2 * (0.75 + ix2 * (-1.875 + ix2 * 6.5625)));
    return kInvSqrtPi * s / x;
  }
  // x^2 <= 676 so exp() stays finite and erfc() stays normal.
  return std::exp(x * x) * std::erfc(x);
}

double log_norm_cdf(double z) {
  if (z >= 0) return std::log1p(-0.5 * std::erfc(z / kSqrt2));
  // Phi(z) = 0.5 erfc(-z/sqrt2) = 0.5 exp(-z^2/2) erfcx(-z/sqrt2)
  return -0.5 * z * z + std::log(0.5 * erfcx(-z / kSqrt2));
}

double norm_quantile(double p) {
  // Acklam's piecewise rational approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (!(p > 0.0) || !(p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  double z;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley refinement against erfc brings the error to ~1e-15.
  const double e = 0.5 * std::erfc(-z / kSqrt2) - p;
  const double u = e * kSqrt2Pi * std::exp(0.5 * z * z);
  z -= u / (1.0 + 0.5 * z * u);
  return z;
}

TruncNormMoments trunc_norm_moments(double alpha, double beta) {
  const double inf = std::numeric_limits<double>::infinity();
  const double log_phi_a = (alpha == -inf) ? -inf : log_norm_cdf(alpha);
  const double log_phi_b = (beta == inf) ? 0.0 : log_norm_cdf(beta);
  // log mass = log(Phi(beta) - Phi(alpha)), difference taken in the log domain.
  double log_mass;
  if (alpha == -inf) {
    log_mass = log_phi_b;
  } else {
    const double d = log_phi_a - log_phi_b;  // < 0
    log_mass = log_phi_b + std::log(-std::expm1(d));
  }

  // P_x = phi(x)/mass; x*P_x terms vanish at infinite endpoints.
  const double pa = (alpha == -inf) ? 0.0 : std::exp(log_norm_pdf(alpha) - log_mass);
  const double pb = (beta == inf) ? 0.0 : std::exp(log_norm_pdf(beta) - log_mass);
  const double apa = (alpha == -inf) ? 0.0 : alpha * pa;
  const double bpb = (beta == inf) ? 0.0 : beta * pb;
  const double a2pa = (alpha == -inf) ? 0.0 : alpha * apa;
  const double b2pb = (beta == inf) ? 0.0 : beta * bpb;

  const double q1 = pa - pb;
  const double q2 = 1.0 + apa - bpb;
  const double q3 = 2.0 * q1 + a2pa - b2pb;

  TruncNormMoments out;
  out.log_mass = log_mass;
  out.mean = q1;
  out.var = std::max(q2 - q1 * q1, 0.0);
  out.m3 = q3 - 3.0 * q1 * q2 + 2.0 * q1 * q1 * q1;
  return out;
}

}  // namespace skoflow
