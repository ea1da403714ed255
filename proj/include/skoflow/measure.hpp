#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace skoflow {

enum class MeasureKind { gaussian, laplace, uniform, atoms, grid };

inline const char* kind_name(MeasureKind k) {
  switch (k) {
    case MeasureKind::gaussian: return "gaussian";
    case MeasureKind::laplace: return "laplace";
    case MeasureKind::uniform: return "uniform";
    case MeasureKind::atoms: return "atoms";
    case MeasureKind::grid: return "grid";
  }
  return "?";
}

struct Interval {
  double lo, hi;
};

struct Moments {
  double mean, var;
};

// A centered probability measure in one of five concrete representations.
// Immutable after construction; all operations on it are pure.
struct Measure {
  MeasureKind kind;

  double sigma = 0.0;            // gaussian
  double scale = 0.0;            // laplace: density exp(-|x|/scale)/(2 scale)
  double lo = 0.0, hi = 0.0;     // uniform
  std::vector<double> points;    // atoms, sorted, duplicates merged
  std::vector<double> weights;   // atoms, positive
  std::vector<double> xs, fs;    // grid: piecewise-linear density on [xs0, xsN]

  bool logconcave = false;  // set for the analytic log-concave families, or by hint
  bool is_dirac = false;    // single atom at 0; simulation short-circuits

  // Cached at construction.
  double mean = 0.0;
  double var = 0.0;
  Interval hull{0.0, 0.0};
  double alpha = 0.0, beta = 0.0;  // density bounds on the hull (uniform/grid), 0 if n/a
  double half_width = 0.0;         // L = max(|hull.lo|, |hull.hi|), inf if unbounded
  std::vector<double> grid_cum;    // grid: CDF at nodes
};

struct MakeOptions {
  bool center = false;
};

inline constexpr double kTolMass = 1e-10;
inline constexpr double kTolCenter = 1e-9;

// Builds and validates a measure from a JSON spec: {"type": "gaussian"|
// "laplace"|"uniform"|"atoms"|"grid", ...payload, "center": bool,
// "logconcave_hint": bool}.
Measure make_measure(const nlohmann::json& spec, MakeOptions opts = {});
Measure measure_from_file(const std::string& path, MakeOptions opts = {});

Measure gaussian_measure(double sigma);
Measure laplace_measure(double scale);
Measure uniform_measure(double lo, double hi, bool center = false);
Measure atoms_measure(std::vector<double> points, std::vector<double> weights,
                      bool center = false);
Measure grid_measure(std::vector<double> xs, std::vector<double> fs,
                     bool center = false, bool logconcave_hint = false);

Moments moments(const Measure& mu);
double cdf(const Measure& mu, double x);
double quantile(const Measure& mu, double p);
Interval support_hull(const Measure& mu);

// i.i.d. inverse-CDF samples, deterministic for a given seed.
std::vector<double> sample_oracle(const Measure& mu, std::size_t n, std::uint64_t seed);

}  // namespace skoflow
