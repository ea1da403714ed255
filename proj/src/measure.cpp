#include "skoflow/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "skoflow/errors.hpp"
#include "skoflow/math.hpp"
#include "skoflow/rng.hpp"

namespace skoflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg) {
  if (!ok) fail(errc::malformed_spec, msg);
}

// integral over one grid cell of x^k * (fa + (fb-fa) t), x = x0 + h t
double cell_moment(double x0, double x1, double fa, double fb, int k) {
  const double h = x1 - x0;
  const double df = fb - fa;
  switch (k) {
    case 0:
      return h * (fa + 0.5 * df);
    case 1:
      return h * (x0 * fa + 0.5 * (x0 * df + h * fa) + h * df / 3.0);
    case 2:
      return h * (x0 * x0 * fa + 0.5 * (x0 * x0 * df + 2.0 * x0 * h * fa) +
                  (2.0 * x0 * h * df + h * h * fa) / 3.0 + 0.25 * h * h * df);
    default:
      return 0.0;
  }
}

void finalize_grid(Measure& m) {
  const std::size_t n = m.xs.size();
  double mass = 0.0, mean = 0.0, var = 0.0;
  m.grid_cum.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    mass += cell_moment(m.xs[i], m.xs[i + 1], m.fs[i], m.fs[i + 1], 0);
    m.grid_cum[i + 1] = mass;
    mean += cell_moment(m.xs[i], m.xs[i + 1], m.fs[i], m.fs[i + 1], 1);
    var += cell_moment(m.xs[i], m.xs[i + 1], m.fs[i], m.fs[i + 1], 2);
  }
  m.mean = mean;
  m.var = var - mean * mean;

  // Hull: trim cells with zero density at both ends.
  std::size_t first = n - 1, last = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (m.fs[i] > 0.0 || m.fs[i + 1] > 0.0) {
      first = std::min(first, i);
      last = std::max(last, i + 1);
    }
  }
  m.hull = {m.xs[first], m.xs[last]};
  m.alpha = kInf;
  m.beta = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    m.alpha = std::min(m.alpha, m.fs[i]);
    m.beta = std::max(m.beta, m.fs[i]);
  }
  m.half_width = std::max(std::abs(m.hull.lo), std::abs(m.hull.hi));
  (void)mass;
}

void finalize_atoms(Measure& m) {
  // Sort and merge duplicate points.
  std::map<double, double> merged;
  for (std::size_t i = 0; i < m.points.size(); ++i) merged[m.points[i]] += m.weights[i];
  m.points.clear();
  m.weights.clear();
  for (auto& [p, w] : merged) {
    m.points.push_back(p);
    m.weights.push_back(w);
  }
  double mass = 0.0, mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    mass += m.weights[i];
    mean += m.weights[i] * m.points[i];
  }
  mean /= mass;
  for (std::size_t i = 0; i < m.points.size(); ++i)
    var += m.weights[i] * (m.points[i] - mean) * (m.points[i] - mean);
  var /= mass;
  m.mean = mean;
  m.var = var;
  m.hull = {m.points.front(), m.points.back()};
  m.half_width = std::max(std::abs(m.hull.lo), std::abs(m.hull.hi));
}

double total_mass(const Measure& m) {
  switch (m.kind) {
    case MeasureKind::atoms: {
      double s = 0.0;
      for (double w : m.weights) s += w;
      return s;
    }
    case MeasureKind::grid:
      return m.grid_cum.back();
    default:
      return 1.0;  // analytic families are exactly normalized
  }
}

void center_measure(Measure& m) {
  const double c = m.mean;
  switch (m.kind) {
    case MeasureKind::uniform:
      m.lo -= c;
      m.hi -= c;
      break;
    case MeasureKind::atoms:
      for (double& p : m.points) p -= c;
      finalize_atoms(m);
      break;
    case MeasureKind::grid:
      for (double& x : m.xs) x -= c;
      finalize_grid(m);
      break;
    default:
      break;
  }
  if (m.kind == MeasureKind::uniform) {
    m.mean = 0.5 * (m.lo + m.hi);
    m.hull = {m.lo, m.hi};
    m.half_width = std::max(std::abs(m.lo), std::abs(m.hi));
  }
}

Measure validate(Measure m, bool center) {
  switch (m.kind) {
    case MeasureKind::gaussian:
      require(std::isfinite(m.sigma) && m.sigma > 0.0, "gaussian requires sigma > 0");
      m.mean = 0.0;
      m.var = m.sigma * m.sigma;
      m.hull = {-kInf, kInf};
      m.half_width = kInf;
      m.logconcave = true;
      return m;
    case MeasureKind::laplace:
      require(std::isfinite(m.scale) && m.scale > 0.0, "laplace requires scale > 0");
      m.mean = 0.0;
      m.var = 2.0 * m.scale * m.scale;
      m.hull = {-kInf, kInf};
      m.half_width = kInf;
      m.logconcave = true;
      return m;
    case MeasureKind::uniform: {
      require(std::isfinite(m.lo) && std::isfinite(m.hi) && m.lo < m.hi,
              "uniform requires lo < hi");
      m.mean = 0.5 * (m.lo + m.hi);
      if (std::abs(m.mean) > kTolCenter) {
        if (center)
          center_measure(m);
        else
          fail(errc::not_centered, "uniform mean is " + std::to_string(m.mean));
      }
      const double w = m.hi - m.lo;
      m.var = w * w / 12.0;
      m.hull = {m.lo, m.hi};
      m.half_width = std::max(std::abs(m.lo), std::abs(m.hi));
      m.alpha = m.beta = 1.0 / w;
      m.logconcave = true;
      return m;
    }
    case MeasureKind::atoms: {
      require(!m.points.empty() && m.points.size() == m.weights.size(),
              "atoms requires equal-length nonempty points/weights");
      for (double p : m.points) require(std::isfinite(p), "atom points must be finite");
      for (double w : m.weights)
        require(std::isfinite(w) && w > 0.0, "atom weights must be positive");
      finalize_atoms(m);
      if (std::abs(total_mass(m) - 1.0) > kTolMass)
        fail(errc::mass_not_one, "atom weights sum to " + std::to_string(total_mass(m)));
      if (std::abs(m.mean) > kTolCenter) {
        if (center)
          center_measure(m);
        else
          fail(errc::not_centered, "atoms mean is " + std::to_string(m.mean));
      }
      if (m.points.size() == 1) {
        // Dirac at 0: accepted, simulation short-circuits.
        m.is_dirac = true;
        m.var = 0.0;
      }
      return m;
    }
    case MeasureKind::grid: {
      require(m.xs.size() >= 2 && m.xs.size() == m.fs.size(),
              "grid requires xs/fs of equal length >= 2");
      for (std::size_t i = 0; i + 1 < m.xs.size(); ++i)
        require(m.xs[i] < m.xs[i + 1], "grid xs must be strictly increasing");
      bool any_pos = false;
      for (double f : m.fs) {
        require(std::isfinite(f) && f >= 0.0, "grid fs must be nonnegative");
        any_pos = any_pos || f > 0.0;
      }
      require(any_pos, "grid fs must have a positive entry");
      finalize_grid(m);
      if (std::abs(total_mass(m) - 1.0) > kTolMass)
        fail(errc::mass_not_one,
             "grid trapezoid mass is " + std::to_string(total_mass(m)));
      if (std::abs(m.mean) > kTolCenter) {
        if (center)
          center_measure(m);
        else
          fail(errc::not_centered, "grid mean is " + std::to_string(m.mean));
      }
      return m;
    }
  }
  fail(errc::malformed_spec, "unknown measure kind");
}

double get_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number())
    fail(errc::malformed_spec, std::string("missing numeric field '") + key + "'");
  return j[key].get<double>();
}

std::vector<double> get_array(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array())
    fail(errc::malformed_spec, std::string("missing array field '") + key + "'");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number())
      fail(errc::malformed_spec, std::string("non-numeric entry in '") + key + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

Measure make_measure(const nlohmann::json& spec, MakeOptions opts) {
  if (!spec.is_object() || !spec.contains("type") || !spec["type"].is_string())
    fail(errc::malformed_spec, "measure spec must be an object with a 'type' string");
  const std::string type = spec["type"].get<std::string>();
  const bool center = opts.center || (spec.contains("center") && spec["center"].is_boolean() &&
                                      spec["center"].get<bool>());
  Measure m;
  if (type == "gaussian") {
    m.kind = MeasureKind::gaussian;
    m.sigma = get_number(spec, "sigma");
  } else if (type == "laplace") {
    m.kind = MeasureKind::laplace;
    m.scale = get_number(spec, "scale");
  } else if (type == "uniform") {
    m.kind = MeasureKind::uniform;
    m.lo = get_number(spec, "lo");
    m.hi = get_number(spec, "hi");
  } else if (type == "atoms") {
    m.kind = MeasureKind::atoms;
    m.points = get_array(spec, "points");
    m.weights = get_array(spec, "weights");
  } else if (type == "grid") {
    m.kind = MeasureKind::grid;
    m.xs = get_array(spec, "xs");
    m.fs = get_array(spec, "fs");
  } else {
    fail(errc::malformed_spec, "unknown measure type '" + type + "'");
  }
  m = validate(std::move(m), center);
  if (spec.contains("logconcave_hint") && spec["logconcave_hint"].is_boolean() &&
      spec["logconcave_hint"].get<bool>())
    m.logconcave = true;
  return m;
}

Measure measure_from_file(const std::string& path, MakeOptions opts) {
  std::ifstream in(path);
  if (!in) fail(errc::malformed_spec, "cannot open measure file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(errc::malformed_spec, "bad JSON in " + path + ": " + e.what());
  }
  return make_measure(j, opts);
}

Measure gaussian_measure(double sigma) {
  Measure m;
  m.kind = MeasureKind::gaussian;
  m.sigma = sigma;
  return validate(std::move(m), false);
}

Measure laplace_measure(double scale) {
  Measure m;
  m.kind = MeasureKind::laplace;
  m.scale = scale;
  return validate(std::move(m), false);
}

Measure uniform_measure(double lo, double hi, bool center) {
  Measure m;
  m.kind = MeasureKind::uniform;
  m.lo = lo;
  m.hi = hi;
  return validate(std::move(m), center);
}

Measure atoms_measure(std::vector<double> points, std::vector<double> weights, bool center) {
  Measure m;
  m.kind = MeasureKind::atoms;
  m.points = std::move(points);
  m.weights = std::move(weights);
  return validate(std::move(m), center);
}

Measure grid_measure(std::vector<double> xs, std::vector<double> fs, bool center,
                     bool logconcave_hint) {
  Measure m;
  m.kind = MeasureKind::grid;
  m.xs = std::move(xs);
  m.fs = std::move(fs);
  m = validate(std::move(m), center);
  if (logconcave_hint) m.logconcave = true;
  return m;
}

Moments moments(const Measure& mu) { return {mu.mean, mu.var}; }

Interval support_hull(const Measure& mu) { return mu.hull; }

double cdf(const Measure& mu, double x) {
  switch (mu.kind) {
    case MeasureKind::gaussian:
      return norm_cdf(x / mu.sigma);
    case MeasureKind::laplace:
      return x < 0.0 ? 0.5 * std::exp(x / mu.scale)
                     : 1.0 - 0.5 * std::exp(-x / mu.scale);
    case MeasureKind::uniform:
      return std::clamp((x - mu.lo) / (mu.hi - mu.lo), 0.0, 1.0);
    case MeasureKind::atoms: {
      double s = 0.0;
      for (std::size_t i = 0; i < mu.points.size() && mu.points[i] <= x; ++i)
        s += mu.weights[i];
      return std::min(s, 1.0);
    }
    case MeasureKind::grid: {
      if (x <= mu.xs.front()) return 0.0;
      if (x >= mu.xs.back()) return 1.0;
      const auto it = std::upper_bound(mu.xs.begin(), mu.xs.end(), x);
      const std::size_t i = static_cast<std::size_t>(it - mu.xs.begin()) - 1;
      const double h = mu.xs[i + 1] - mu.xs[i];
      const double d = x - mu.xs[i];
      const double df = mu.fs[i + 1] - mu.fs[i];
      return std::clamp(mu.grid_cum[i] + mu.fs[i] * d + 0.5 * df * d * d / h, 0.0, 1.0);
    }
  }
  return 0.0;
}

double quantile(const Measure& mu, double p) {
  p = std::clamp(p, 0.0, 1.0);
  switch (mu.kind) {
    case MeasureKind::gaussian:
      return mu.sigma * norm_quantile(p);
    case MeasureKind::laplace:
      return p < 0.5 ? mu.scale * std::log(2.0 * p)
                     : -mu.scale * std::log(2.0 * (1.0 - p));
    case MeasureKind::uniform:
      return mu.lo + p * (mu.hi - mu.lo);
    case MeasureKind::atoms: {
      double s = 0.0;
      for (std::size_t i = 0; i < mu.points.size(); ++i) {
        s += mu.weights[i];
        if (s >= p) return mu.points[i];
      }
      return mu.points.back();
    }
    case MeasureKind::grid: {
      const auto it = std::lower_bound(mu.grid_cum.begin(), mu.grid_cum.end(), p);
      if (it == mu.grid_cum.begin()) return mu.xs.front();
      if (it == mu.grid_cum.end()) return mu.xs.back();
      const std::size_t i = static_cast<std::size_t>(it - mu.grid_cum.begin()) - 1;
      const double h = mu.xs[i + 1] - mu.xs[i];
      const double f0 = mu.fs[i];
      const double df = mu.fs[i + 1] - mu.fs[i];
      const double target = p - mu.grid_cum[i];
      // solve f0 d + df d^2/(2h) = target for d in [0, h]
      double d;
      if (std::abs(df) * h < 1e-12 * std::max(f0, 1e-300)) {
        d = target / std::max(f0, 1e-300);
      } else {
        const double disc = f0 * f0 + 2.0 * df * target / h;
        d = h * (std::sqrt(std::max(disc, 0.0)) - f0) / df;
      }
      return mu.xs[i] + std::clamp(d, 0.0, h);
    }
  }
  return 0.0;
}

std::vector<double> sample_oracle(const Measure& mu, std::size_t n, std::uint64_t seed) {
  RngStream rng(splitmix64(seed ^ 0x5ca1ab1edeadbeefULL));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = quantile(mu, rng.uniform01());
  return out;
}

}  // namespace skoflow
