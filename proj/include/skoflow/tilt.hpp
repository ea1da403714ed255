#pragma once

#include <optional>

#include "skoflow/measure.hpp"

namespace skoflow {

// Parameters of the Gaussian tilt exp(c x - b x^2 / 2).
struct TiltParams {
  double b = 0.0;
  double c = 0.0;
};

inline TiltParams compose(TiltParams p, TiltParams q) { return {p.b + q.b, p.c + q.c}; }

// Normalizer, mean, variance and third central moment of the tilted measure.
struct TiltedMoments {
  double V;      // normalizer (may overflow to inf for extreme tilts; use log_V)
  double log_V;
  double a;      // mean
  double A;      // variance
  double m3;     // third central moment
};

struct TiltDerivatives {
  double a1;   // da/db
  double a2;   // da/dc  (= A)
  double c1;   // dc/da  (= 1/A)
  double c2;   // dc/db
  double c11;  // d2c/da2
};

enum class TiltRoute { automatic, closed_form, quadrature };

struct TiltOptions {
  TiltRoute route = TiltRoute::automatic;
  std::optional<double> center_hint;  // warm start for the quadrature center
};

// Throws Error(tilt_not_integrable) when V would diverge (b < 0, or b = 0 with
// c outside the integrable range).
void check_integrable(const Measure& mu, TiltParams p);
bool tilt_integrable(const Measure& mu, TiltParams p);

TiltedMoments tilted_moments(const Measure& mu, TiltParams p, const TiltOptions& opts = {});

// F(x) = V^{-1} exp(c x - b x^2/2), evaluated in the log domain.
double tilted_log_density(const Measure& mu, TiltParams p, double x);
double tilted_density(const Measure& mu, TiltParams p, double x);

// Solves a_mu(b, c) = a_target for c.  a_target must lie strictly inside the
// support hull.  Uses bracketed Newton with the analytic derivative A and
// bisection fallback; iteration cap 200.  moments_out, when given, receives
// the tilted moments at the returned c.
double solve_c(const Measure& mu, double a_target, double b,
               std::optional<double> c_hint = std::nullopt, double tol_scale = 1e-10,
               TiltedMoments* moments_out = nullptr);

TiltDerivatives tilt_derivatives(const Measure& mu, TiltParams p);

// A measure together with an accumulated tilt: represents mu_t = F_t * mu
// without re-gridding.  Tilting (b1,c1) then (b2,c2) equals tilting
// (b1+b2, c1+c2); normalizers compose as a ratio.
struct TiltedMeasure {
  Measure base;
  TiltParams offset{0.0, 0.0};
  double log_V0 = 0.0;  // log V_base(offset)

  TiltedMeasure(Measure m);  // NOLINT: implicit by design
  TiltedMeasure(Measure m, TiltParams off);
};

TiltedMoments tilted_moments(const TiltedMeasure& h, TiltParams p, const TiltOptions& opts = {});
double solve_c(const TiltedMeasure& h, double a_target, double b,
               std::optional<double> c_hint = std::nullopt, double tol_scale = 1e-10,
               TiltedMoments* moments_out = nullptr);
TiltDerivatives tilt_derivatives(const TiltedMeasure& h, TiltParams p);
TiltedMeasure tilted_measure(const TiltedMeasure& h, TiltParams p);

inline Interval support_hull(const TiltedMeasure& h) { return h.base.hull; }

}  // namespace skoflow
