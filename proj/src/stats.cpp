#include "skoflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace skoflow {
namespace stats {

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Theta-transformed series, accurate for small lambda.
    const double y = std::exp(-M_PI * M_PI / (8.0 * lambda * lambda));
    const double sum = y + std::pow(y, 9) + std::pow(y, 25) + std::pow(y, 49);
    return 1.0 - std::sqrt(2.0 * M_PI) / lambda * sum;
  }
  const double y = std::exp(-2.0 * lambda * lambda);
  double q = 0.0, term;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    term = sign * std::pow(y, k * k);
    q += term;
    if (std::abs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * q, 0.0, 1.0);
}

namespace {

double ks_pvalue(double d, double n_eff) {
  const double sq = std::sqrt(n_eff);
  return kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
}

}  // namespace

KsResult ks_vs_measure(std::vector<double> samples, const Measure& mu) {
  const std::size_t n = samples.size();
  if (mu.kind == MeasureKind::atoms) {
    // Snap each sample to the nearest atom; a path stopped by the A-threshold
    // ends within O(eps) of an atom rather than exactly on it.
    std::vector<double> freq(mu.points.size(), 0.0);
    for (double x : samples) {
      std::size_t best = 0;
      double bd = std::abs(x - mu.points[0]);
      for (std::size_t i = 1; i < mu.points.size(); ++i) {
        const double d = std::abs(x - mu.points[i]);
        if (d < bd) {
          bd = d;
          best = i;
        }
      }
      freq[best] += 1.0;
    }
    double d = 0.0, femp = 0.0, fref = 0.0;
    for (std::size_t i = 0; i < mu.points.size(); ++i) {
      femp += freq[i] / static_cast<double>(n);
      fref += mu.weights[i];
      d = std::max(d, std::abs(femp - fref));
    }
    return {d, ks_pvalue(d, static_cast<double>(n))};
  }
  std::sort(samples.begin(), samples.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(mu, samples[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, f - lo, hi - f});
  }
  return {d, ks_pvalue(d, static_cast<double>(n))};
}

KsResult ks_two_sample(std::vector<double> xs, std::vector<double> ys) {
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    const double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] <= v) ++i;
    while (j < ys.size() && ys[j] <= v) ++j;
    d = std::max(d, std::abs(i / nx - j / ny));
  }
  const double n_eff = nx * ny / (nx + ny);
  return {d, ks_pvalue(d, n_eff)};
}

MeanSE mean_se(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n == 0) return {0.0, 0.0, 0};
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(n);
  if (n == 1) return {m, 0.0, 1};
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return {m, sd / std::sqrt(static_cast<double>(n)), n};
}

std::optional<TailFit> tail_fit(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  std::vector<std::pair<double, double>> pts;  // (t, P(T > t))
  double last_t = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < n; ++i) {
    const double p = static_cast<double>(n - 1 - i) / static_cast<double>(n);
    if (p < 0.001 || p > 0.5) continue;
    if (samples[i] == last_t) {
      pts.back().second = p;  // keep the rightmost survival value at ties
      continue;
    }
    last_t = samples[i];
    pts.emplace_back(samples[i], p);
  }
  if (pts.size() < 5) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const double m = static_cast<double>(pts.size());
  for (const auto& [t, p] : pts) {
    const double y = std::log(p);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    syy += y * y;
  }
  const double denom = m * sxx - sx * sx;
  if (denom <= 0.0) return std::nullopt;
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;
  double ss_res = 0.0, ss_tot = 0.0;
  const double ybar = sy / m;
  for (const auto& [t, p] : pts) {
    const double y = std::log(p);
    const double e = y - (intercept + slope * t);
    ss_res += e * e;
    ss_tot += (y - ybar) * (y - ybar);
  }
  TailFit fit;
  fit.rate = -slope;
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  fit.n_points = pts.size();
  fit.survival = std::move(pts);
  return fit;
}

}  // namespace stats
}  // namespace skoflow
