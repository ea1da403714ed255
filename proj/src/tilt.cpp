#include "skoflow/tilt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "skoflow/errors.hpp"
#include "skoflow/math.hpp"
#include "skoflow/quadrature.hpp"

namespace skoflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TiltedMoments from_parts(double log_V, double a, double A, double m3) {
  return {std::exp(log_V), log_V, a, A, m3};
}

TiltedMoments gaussian_closed(const Measure& mu, TiltParams p) {
  const double lam = p.b + 1.0 / (mu.sigma * mu.sigma);
  const double A = 1.0 / lam;
  const double a = p.c * A;
  const double log_V = -0.5 * std::log(mu.sigma * mu.sigma * lam) + 0.5 * p.c * p.c * A;
  return from_parts(log_V, a, A, 0.0);
}

TiltedMoments atoms_closed(const Measure& mu, TiltParams p) {
  const std::size_t n = mu.points.size();
  double gmax = -kInf;
  for (std::size_t i = 0; i < n; ++i)
    gmax = std::max(gmax, p.c * mu.points[i] - 0.5 * p.b * mu.points[i] * mu.points[i]);
  double s0 = 0.0, s1 = 0.0;
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = mu.points[i];
    e[i] = mu.weights[i] * std::exp(p.c * x - 0.5 * p.b * x * x - gmax);
    s0 += e[i];
    s1 += e[i] * x;
  }
  const double a = s1 / s0;
  double s2 = 0.0, s3 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = mu.points[i] - a;
    s2 += e[i] * u * u;
    s3 += e[i] * u * u * u;
  }
  return from_parts(gmax + std::log(s0), a, s2 / s0, s3 / s0);
}

// Moments of one Gaussian-restricted piece: weight exp(c' x - b x^2/2) on
// [x0, x1] is exp(c'^2/(2b)) times a N(c'/b, 1/b) slice.
struct PieceMoments {
  double log_mass;
  double mean, var, m3;
};

PieceMoments gauss_slice(double cp, double b, double x0, double x1) {
  const double s = 1.0 / std::sqrt(b);
  const double m = cp / b;
  const double alpha = (x0 == -kInf) ? -kInf : (x0 - m) / s;
  const double beta = (x1 == kInf) ? kInf : (x1 - m) / s;
  const auto tn = trunc_norm_moments(alpha, beta);
  PieceMoments out;
  out.log_mass = 0.5 * cp * cp / b + std::log(s) + 0.5 * std::log(2.0 * M_PI) + tn.log_mass;
  out.mean = m + s * tn.mean;
  out.var = s * s * tn.var;
  out.m3 = s * s * s * tn.m3;
  return out;
}

TiltedMoments combine_pieces(const std::vector<PieceMoments>& ps) {
  double log_V = -kInf;
  for (const auto& p : ps) log_V = log_add(log_V, p.log_mass);
  double a = 0.0;
  std::vector<double> w(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    w[i] = std::exp(ps[i].log_mass - log_V);
    a += w[i] * ps[i].mean;
  }
  double A = 0.0, m3 = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double d = ps[i].mean - a;
    A += w[i] * (ps[i].var + d * d);
    m3 += w[i] * (ps[i].m3 + 3.0 * d * ps[i].var + d * d * d);
  }
  return from_parts(log_V, a, A, m3);
}

TiltedMoments uniform_closed(const Measure& mu, TiltParams p) {
  auto pm = gauss_slice(p.c, p.b, mu.lo, mu.hi);
  pm.log_mass -= std::log(mu.hi - mu.lo);
  return from_parts(pm.log_mass, pm.mean, pm.var, pm.m3);
}

TiltedMoments laplace_closed(const Measure& mu, TiltParams p) {
  const double inv_s = 1.0 / mu.scale;
  auto neg = gauss_slice(p.c + inv_s, p.b, -kInf, 0.0);
  auto pos = gauss_slice(p.c - inv_s, p.b, 0.0, kInf);
  const double logw = std::log(0.5 * inv_s);
  neg.log_mass += logw;
  pos.log_mass += logw;
  return combine_pieces({neg, pos});
}

std::vector<ExpPiece> build_pieces(const Measure& mu, TiltParams p) {
  std::vector<ExpPiece> out;
  const double g2 = -0.5 * p.b;
  switch (mu.kind) {
    case MeasureKind::gaussian: {
      const double w0 = 1.0 / (mu.sigma * kSqrt2Pi);
      out.push_back({-kInf, kInf, w0, 0.0, 0.0, p.c,
                     g2 - 0.5 / (mu.sigma * mu.sigma)});
      break;
    }
    case MeasureKind::laplace: {
      const double w0 = 0.5 / mu.scale;
      out.push_back({-kInf, 0.0, w0, 0.0, 0.0, p.c + 1.0 / mu.scale, g2});
      out.push_back({0.0, kInf, w0, 0.0, 0.0, p.c - 1.0 / mu.scale, g2});
      break;
    }
    case MeasureKind::uniform:
      out.push_back({mu.lo, mu.hi, 1.0 / (mu.hi - mu.lo), 0.0, 0.0, p.c, g2});
      break;
    case MeasureKind::grid:
      for (std::size_t i = 0; i + 1 < mu.xs.size(); ++i) {
        if (mu.fs[i] == 0.0 && mu.fs[i + 1] == 0.0) continue;
        const double h = mu.xs[i + 1] - mu.xs[i];
        const double slope = (mu.fs[i + 1] - mu.fs[i]) / h;
        out.push_back({mu.xs[i], mu.xs[i + 1], mu.fs[i] - slope * mu.xs[i], slope,
                       0.0, p.c, g2});
      }
      break;
    case MeasureKind::atoms:
      fail(errc::quadrature_failure, "no quadrature route for atomic measures");
  }
  return out;
}

TiltedMoments quadrature_moments(const Measure& mu, TiltParams p,
                                 std::optional<double> center_hint) {
  const auto pieces = build_pieces(mu, p);
  double center;
  if (center_hint) {
    center = *center_hint;
  } else if (p.b > 0.0) {
    center = std::clamp(p.c / p.b, mu.hull.lo, mu.hull.hi);
  } else {
    center = std::clamp(0.0, mu.hull.lo, mu.hull.hi);
  }
  for (int pass = 0;; ++pass) {
    const auto q = integrate_exp_pieces(pieces, center);
    const double drift = std::abs(q.mean - center);
    if (pass >= 2 || drift <= 0.5 * std::sqrt(q.var) + 1e-14 * (1.0 + std::abs(q.mean)))
      return from_parts(q.log_norm, q.mean, q.var, q.m3);
    center = q.mean;  // re-center once or twice for accuracy of central moments
  }
}

}  // namespace

bool tilt_integrable(const Measure& mu, TiltParams p) {
  if (!(p.b >= 0.0) || !std::isfinite(p.c)) return false;
  if (p.b > 0.0) return true;
  if (mu.kind == MeasureKind::laplace) return std::abs(p.c) < 1.0 / mu.scale;
  return true;  // gaussian dominates any linear tilt; compact supports always work
}

void check_integrable(const Measure& mu, TiltParams p) {
  if (!tilt_integrable(mu, p))
    fail(errc::tilt_not_integrable,
         "tilt (b=" + std::to_string(p.b) + ", c=" + std::to_string(p.c) +
             ") is not integrable for " + kind_name(mu.kind));
}

TiltedMoments tilted_moments(const Measure& mu, TiltParams p, const TiltOptions& opts) {
  check_integrable(mu, p);
  const bool forced_quad = opts.route == TiltRoute::quadrature;
  switch (mu.kind) {
    case MeasureKind::gaussian:
      if (!forced_quad) return gaussian_closed(mu, p);
      break;
    case MeasureKind::atoms:
      return atoms_closed(mu, p);
    case MeasureKind::uniform:
      // b = 0 keeps the closed-form Gaussian slice ill-defined; the quadrature
      // route handles the purely exponential tilt.
      if (!forced_quad && p.b > 0.0) return uniform_closed(mu, p);
      break;
    case MeasureKind::laplace:
      if (!forced_quad && p.b > 0.0) return laplace_closed(mu, p);
      break;
    case MeasureKind::grid:
      break;
  }
  if (opts.route == TiltRoute::closed_form)
    fail(errc::quadrature_failure, "no closed form for this measure/tilt");
  return quadrature_moments(mu, p, opts.center_hint);
}

double tilted_log_density(const Measure& mu, TiltParams p, double x) {
  const auto m = tilted_moments(mu, p);
  return p.c * x - 0.5 * p.b * x * x - m.log_V;
}

double tilted_density(const Measure& mu, TiltParams p, double x) {
  return std::exp(tilted_log_density(mu, p, x));
}

double solve_c(const Measure& mu, double a_target, double b, std::optional<double> c_hint,
               double tol_scale, TiltedMoments* moments_out) {
  const Interval hull = mu.hull;
  if (!(a_target > hull.lo) || !(a_target < hull.hi))
    fail(errc::target_outside_hull,
         "a_target=" + std::to_string(a_target) + " not strictly inside hull");
  if (!(b >= 0.0)) fail(errc::tilt_not_integrable, "b must be nonnegative");

  // Admissible c range (only restrictive for b = 0 on Laplace).
  double c_min = -kInf, c_max = kInf;
  if (b == 0.0 && mu.kind == MeasureKind::laplace) {
    c_max = 1.0 / mu.scale;
    c_min = -c_max;
  }
  const auto clamp_c = [&](double c) {
    if (c <= c_min) return c_min + 0.25 * (std::min(c_max, c_min + 4.0) - c_min);
    if (c >= c_max) return c_max - 0.25 * (c_max - std::max(c_min, c_max - 4.0));
    return c;
  };

  const double tol_a = tol_scale * (1.0 + std::abs(a_target));
  double last_a = a_target;
  const auto eval = [&](double c) {
    TiltOptions opts;
    opts.center_hint = last_a;
    const auto m = tilted_moments(mu, {b, c}, opts);
    last_a = m.a;
    return m;
  };

  double c = clamp_c(c_hint.value_or(0.0));
  auto m = eval(c);
  double f = m.a - a_target;

  // Bracket by doubling steps away from the starting point; toward a finite
  // admissible boundary the step halves the remaining gap instead.
  double c_lo = c, c_hi = c, f_lo = f, f_hi = f;
  double step = 1.0;
  int budget = 200;
  while (f_lo > 0.0 && budget-- > 0) {
    c_lo = (c_lo - step > c_min) ? c_lo - step : 0.5 * (c_lo + c_min);
    f_lo = eval(c_lo).a - a_target;
    step *= 2.0;
  }
  step = 1.0;
  while (f_hi < 0.0 && budget-- > 0) {
    c_hi = (c_hi + step < c_max) ? c_hi + step : 0.5 * (c_hi + c_max);
    f_hi = eval(c_hi).a - a_target;
    step *= 2.0;
  }
  if (budget <= 0) fail(errc::no_convergence, "bracket expansion exhausted");

  const auto finish = [&](double root) {
    if (moments_out) *moments_out = m;
    return root;
  };
  if (std::abs(f) <= tol_a) return finish(c);
  for (int iter = 0; iter < 200; ++iter) {
    if (f > 0.0)
      c_hi = c;
    else
      c_lo = c;
    double c_next = (m.A > 0.0) ? c - f / m.A : 0.5 * (c_lo + c_hi);
    if (!(c_next > c_lo) || !(c_next < c_hi)) c_next = 0.5 * (c_lo + c_hi);
    c = c_next;
    m = eval(c);
    f = m.a - a_target;
    if (std::abs(f) <= tol_a) return finish(c);
  }
  fail(errc::no_convergence, "solve_c iteration cap exceeded");
}

TiltDerivatives tilt_derivatives(const Measure& mu, TiltParams p) {
  const auto m = tilted_moments(mu, p);
  if (!(m.A > 0.0)) fail(errc::degenerate_tilt, "A <= 0");
  TiltDerivatives d;
  d.a2 = m.A;
  d.a1 = -0.5 * (m.m3 + 2.0 * m.a * m.A);  // -Cov(x, x^2)/2 under the tilt
  d.c1 = 1.0 / m.A;
  d.c2 = -d.a1 / d.a2;
  d.c11 = -m.m3 / (m.A * m.A * m.A);  // d2a/dc2 = m3
  return d;
}

TiltedMeasure::TiltedMeasure(Measure m) : base(std::move(m)) {}

TiltedMeasure::TiltedMeasure(Measure m, TiltParams off) : base(std::move(m)), offset(off) {
  check_integrable(base, offset);
  if (base.is_dirac) return;
  log_V0 = tilted_moments(base, offset).log_V;
}

TiltedMoments tilted_moments(const TiltedMeasure& h, TiltParams p, const TiltOptions& opts) {
  auto m = tilted_moments(h.base, compose(h.offset, p), opts);
  m.log_V -= h.log_V0;
  m.V = std::exp(m.log_V);
  return m;
}

double solve_c(const TiltedMeasure& h, double a_target, double b,
               std::optional<double> c_hint, double tol_scale, TiltedMoments* moments_out) {
  std::optional<double> hint;
  if (c_hint) hint = *c_hint + h.offset.c;
  const double c_total =
      solve_c(h.base, a_target, b + h.offset.b, hint, tol_scale, moments_out);
  if (moments_out) {
    moments_out->log_V -= h.log_V0;
    moments_out->V = std::exp(moments_out->log_V);
  }
  return c_total - h.offset.c;
}

TiltDerivatives tilt_derivatives(const TiltedMeasure& h, TiltParams p) {
  return tilt_derivatives(h.base, compose(h.offset, p));
}

TiltedMeasure tilted_measure(const TiltedMeasure& h, TiltParams p) {
  return TiltedMeasure(h.base, compose(h.offset, p));
}

}  // namespace skoflow
