#include "skoflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skoflow/errors.hpp"

namespace skoflow {

namespace {

// QUADPACK 15-point Kronrod / 7-point Gauss pair on [-1, 1].
constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
constexpr double kWgk[8] = {
    0.02293532201052922, 0.06309209262997855, 0.10479001032225018,
    0.14065325971552592, 0.16900472663926790, 0.19035057806478540,
    0.20443294007529889, 0.20948214108472783};
constexpr double kWg[4] = {0.12948496616886969, 0.27970539148927667,
                           0.38183005050511894, 0.41795918367346938};

// Exponent cutoff: contributions below exp(-45) of the peak are dropped.
constexpr double kExpCutoff = 45.0;

struct Panel {
  double a, b;
  std::array<double, 4> kron;
  std::array<double, 4> err;
  const ExpPiece* piece;
};

inline void eval_point(const ExpPiece& p, double x, double center, double shift,
                       std::array<double, 4>& f) {
  const double w = p.w0 + p.w1 * x;
  const double g = p.g0 + x * (p.g1 + x * p.g2) - shift;
  const double e = w * std::exp(g);
  const double u = x - center;
  f[0] = e;
  f[1] = e * u;
  f[2] = f[1] * u;
  f[3] = f[2] * u;
}

Panel eval_panel(const ExpPiece& piece, double a, double b, double center, double shift) {
  Panel pan;
  pan.a = a;
  pan.b = b;
  pan.piece = &piece;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, 4> fk{0, 0, 0, 0}, fg{0, 0, 0, 0}, f;

  eval_point(piece, mid, center, shift, f);
  for (int k = 0; k < 4; ++k) {
    fk[k] += kWgk[7] * f[k];
    fg[k] += kWg[3] * f[k];
  }
  for (int j = 0; j < 7; ++j) {
    std::array<double, 4> sum{0, 0, 0, 0};
    eval_point(piece, mid - half * kXgk[j], center, shift, f);
    for (int k = 0; k < 4; ++k) sum[k] = f[k];
    eval_point(piece, mid + half * kXgk[j], center, shift, f);
    for (int k = 0; k < 4; ++k) sum[k] += f[k];
    for (int k = 0; k < 4; ++k) fk[k] += kWgk[j] * sum[k];
    if (j % 2 == 1) {  // Gauss nodes are the odd-index Kronrod nodes
      const int jg = j / 2;
      for (int k = 0; k < 4; ++k) fg[k] += kWg[jg] * sum[k];
    }
  }
  for (int k = 0; k < 4; ++k) {
    pan.kron[k] = half * fk[k];
    pan.err[k] = std::abs(half * (fk[k] - fg[k]));
  }
  return pan;
}

// Restrict [lo, hi] to where the exponent is above (max - cutoff).
bool truncate_piece(const ExpPiece& p, double gmax, double& lo, double& hi) {
  lo = p.lo;
  hi = p.hi;
  const double bound = gmax - kExpCutoff;
  const auto g = [&](double x) { return p.g0 + x * (p.g1 + x * p.g2); };
  if (p.g2 < 0.0) {
    // g(x) = bound at x = (-g1 +- sqrt(g1^2 - 4 g2 (g0 - bound))) / (2 g2)
    const double disc = p.g1 * p.g1 - 4.0 * p.g2 * (p.g0 - bound);
    if (disc <= 0.0) return false;  // whole parabola below the cutoff
    const double sq = std::sqrt(disc);
    const double r1 = (-p.g1 + sq) / (2.0 * p.g2);
    const double r2 = (-p.g1 - sq) / (2.0 * p.g2);
    lo = std::max(lo, std::min(r1, r2));
    hi = std::min(hi, std::max(r1, r2));
  } else if (p.g1 != 0.0) {
    const double r = (bound - p.g0) / p.g1;
    if (p.g1 > 0.0)
      lo = std::max(lo, r);
    else
      hi = std::min(hi, r);
    if (!std::isfinite(lo) || !std::isfinite(hi))
      fail(errc::tilt_not_integrable, "unbounded linear exponent over infinite piece");
  } else {
    if (g(0.0) < bound) return false;
    if (!std::isfinite(lo) || !std::isfinite(hi))
      fail(errc::tilt_not_integrable, "flat exponent over infinite piece");
  }
  return hi > lo;
}

double piece_max_exponent(const ExpPiece& p) {
  const auto g = [&](double x) { return p.g0 + x * (p.g1 + x * p.g2); };
  double m = -std::numeric_limits<double>::infinity();
  if (std::isfinite(p.lo)) m = std::max(m, g(p.lo));
  if (std::isfinite(p.hi)) m = std::max(m, g(p.hi));
  if (p.g2 < 0.0) {
    const double xc = -p.g1 / (2.0 * p.g2);
    if (xc > p.lo && xc < p.hi) m = std::max(m, g(xc));
  } else if (p.g2 == 0.0) {
    // linear: max at the endpoint in the slope direction; infinite endpoint
    // with positive slope means a non-integrable tilt
    if ((p.g1 > 0.0 && !std::isfinite(p.hi)) || (p.g1 < 0.0 && !std::isfinite(p.lo)))
      fail(errc::tilt_not_integrable, "exponent grows along an infinite piece");
    if (p.g1 == 0.0 && (!std::isfinite(p.lo) || !std::isfinite(p.hi)))
      fail(errc::tilt_not_integrable, "flat exponent over infinite piece");
  }
  return m;
}

}  // namespace

QuadMoments integrate_exp_pieces(const std::vector<ExpPiece>& pieces, double center,
                                 double rel_tol) {
  double shift = -std::numeric_limits<double>::infinity();
  for (const auto& p : pieces)
    if (!(p.w0 == 0.0 && p.w1 == 0.0)) shift = std::max(shift, piece_max_exponent(p));
  if (!std::isfinite(shift))
    fail(errc::quadrature_failure, "no contributing pieces");

  std::vector<Panel> panels;
  panels.reserve(64);
  for (const auto& p : pieces) {
    if (p.w0 == 0.0 && p.w1 == 0.0) continue;
    double lo, hi;
    if (!truncate_piece(p, shift, lo, hi)) continue;
    panels.push_back(eval_panel(p, lo, hi, center, shift));
  }
  if (panels.empty()) fail(errc::quadrature_failure, "integrand vanished everywhere");

  std::array<double, 4> total{0, 0, 0, 0}, toterr{0, 0, 0, 0};
  auto recompute_totals = [&]() {
    total = {0, 0, 0, 0};
    toterr = {0, 0, 0, 0};
    for (const auto& pan : panels)
      for (int k = 0; k < 4; ++k) {
        total[k] += pan.kron[k];
        toterr[k] += pan.err[k];
      }
  };
  recompute_totals();

  const int max_panels = 4096;
  while (static_cast<int>(panels.size()) < max_panels) {
    // Scales tie the signed odd components to the positive even ones so that
    // near-cancelling moments are not over-refined.
    const double s0 = std::abs(total[0]);
    const double sigma = std::sqrt(std::max(total[2], 0.0) / std::max(s0, 1e-300));
    const std::array<double, 4> scale = {
        std::max(s0, 1e-300), std::max(std::abs(total[1]), s0 * sigma),
        std::max(std::abs(total[2]), s0 * sigma * sigma),
        std::max(std::abs(total[3]), s0 * sigma * sigma * sigma)};
    double worst = 0.0;
    std::size_t worst_i = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      double e = 0.0;
      for (int k = 0; k < 4; ++k) e = std::max(e, panels[i].err[k] / scale[k]);
      if (e > worst) {
        worst = e;
        worst_i = i;
      }
    }
    bool done = true;
    for (int k = 0; k < 4; ++k) done = done && toterr[k] <= rel_tol * scale[k];
    if (done) break;
    Panel old = panels[worst_i];
    const double mid = 0.5 * (old.a + old.b);
    if (mid <= old.a || mid >= old.b) break;  // interval at machine resolution
    panels[worst_i] = eval_panel(*old.piece, old.a, mid, center, shift);
    panels.push_back(eval_panel(*old.piece, mid, old.b, center, shift));
    recompute_totals();
  }

  const double rel_err = toterr[0] / std::max(std::abs(total[0]), 1e-300);
  if (!(total[0] > 0.0) || rel_err > 1e-10)
    fail(errc::quadrature_failure, "requested relative accuracy not achieved");

  QuadMoments out;
  out.rel_err = rel_err;
  out.log_norm = shift + std::log(total[0]);
  const double r = total[1] / total[0];
  out.mean = center + r;
  const double q2 = total[2] / total[0];
  const double q3 = total[3] / total[0];
  out.var = std::max(q2 - r * r, 0.0);
  out.m3 = q3 - 3.0 * r * q2 + 2.0 * r * r * r;
  return out;
}

}  // namespace skoflow
