#pragma once

#include <cmath>

namespace skoflow {

inline constexpr double kSqrt2 = 1.4142135623730950488;
inline constexpr double kSqrt2Pi = 2.5066282746310005024;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;
inline constexpr double kInvSqrtPi = 0.56418958354775628695;

// Scaled complementary error function, exp(x^2) erfc(x).
double erfcx(double x);

// log(Phi(z)) and log(phi(z)) for the standard normal; stable for very negative z.
double log_norm_cdf(double z);
inline double log_norm_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

// Inverse standard normal CDF (Acklam's rational approximation, ~1e-9 absolute
// accuracy in z, well below every statistical tolerance in this project).
double norm_quantile(double p);

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -INFINITY) return a;
  return a + std::log1p(std::exp(b - a));
}

// Moments of a standard normal restricted to [alpha, beta] (either end may be
// infinite).  Works in the log domain so that slices arbitrarily deep in the
// tail keep a meaningful log-mass.  Central variance/third-moment lose
// relative accuracy like z^4*eps deep in the tail; that regime only feeds
// diagnostics.
struct TruncNormMoments {
  double log_mass;  // log(Phi(beta) - Phi(alpha))
  double mean;      // E[z | alpha <= z <= beta]
  double var;       // central variance, in z units
  double m3;        // central third moment, in z units
};
TruncNormMoments trunc_norm_moments(double alpha, double beta);

}  // namespace skoflow
