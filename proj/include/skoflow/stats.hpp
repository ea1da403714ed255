#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "skoflow/measure.hpp"

namespace skoflow {
namespace stats {

// Survival function of the Kolmogorov distribution.
double kolmogorov_q(double lambda);

struct KsResult {
  double d;
  double p;
};

// One-sample KS against a measure's CDF.  For atomic measures the discrete
// variant is used: samples snap to the nearest atom and the sup runs over
// atoms, with the (conservative) continuous critical value.
KsResult ks_vs_measure(std::vector<double> samples, const Measure& mu);

KsResult ks_two_sample(std::vector<double> xs, std::vector<double> ys);

struct MeanSE {
  double mean;
  double se;
  std::size_t n;
};
MeanSE mean_se(const std::vector<double>& xs);

struct TailFit {
  double rate;  // -slope of log P(T > t)
  double r2;
  std::size_t n_points;
  std::vector<std::pair<double, double>> survival;  // (t, P(T > t)) in the fit window
};

// Least-squares fit of log P(T > t) over the window P in [0.001, 0.5].
// nullopt when fewer than 5 distinct survival points exist (degenerate tail).
std::optional<TailFit> tail_fit(std::vector<double> samples);

}  // namespace stats
}  // namespace skoflow
