#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "skoflow/flow.hpp"
#include "skoflow/measure.hpp"
#include "skoflow/stats.hpp"

namespace skoflow {

struct CheckReport {
  std::string name;
  bool passed = false;
  double statistic = 0.0;
  double threshold = 0.0;
  std::size_t n_used = 0;
  std::string detail;
};

nlohmann::json to_json(const CheckReport& r);
bool all_passed(const std::vector<CheckReport>& reports);

enum class BoundKind { unilc, compact_reg, compact_lc, logconcave_At, compact_At };

struct Hypotheses {
  std::optional<double> sigma;            // Gaussian-dominating variance
  std::optional<double> alpha, beta, L;   // density bounds / support half-width
};

// Fills hypothesis slots that the measure itself determines (sigma for the
// Gaussian family, alpha/beta/L for uniform and grid densities).
Hypotheses derive_hypotheses(const Measure& mu, Hypotheses user);

stats::KsResult ks_test(const std::vector<double>& samples, const Measure& mu);

std::vector<CheckReport> check_embedding_and_mean(const Measure& mu,
                                                  const EnsembleSummary& summary,
                                                  double eps_A);

std::vector<CheckReport> check_martingales(const Measure& mu,
                                           const std::vector<PathResult>& paths);

CheckReport check_bounds(const std::vector<PathResult>& paths, const Measure& mu,
                         BoundKind kind, const Hypotheses& hyp, double eps_A,
                         double dt_max);

CheckReport tail_estimate_report(const std::vector<double>& stop_times);

std::vector<CheckReport> check_restart_consistency(const Measure& mu, double s,
                                                   const SimConfig& cfg, std::size_t n,
                                                   int n_threads);

// Finite-difference verification of the tilt derivative identities on a grid
// of (b, c) points.
std::vector<CheckReport> check_derivative_identities(const Measure& mu,
                                                     const std::vector<TiltParams>& grid);
std::vector<TiltParams> default_derivative_grid();

// Drives both schemes with shared Brownian increments; reports the Euler
// scheme's |a - w| defect at probe_t for each dt_max, the shrink factors under
// halving, and |T_A - T_B| at the finest dt.
struct SchemeComparison {
  std::vector<double> dt_values;
  std::vector<double> mean_gap;  // mean |a - w| at probe_t per dt
  double max_T_diff = 0.0;       // at fine_dt
};
SchemeComparison compare_schemes(const Measure& mu, const std::vector<double>& dt_values,
                                 double fine_dt, double probe_t, std::size_t n_paths,
                                 std::uint64_t seed);
std::vector<CheckReport> check_scheme_consistency(const Measure& mu, std::uint64_t seed);

// Independent fine-step Brownian first-exit simulation (the oracle for the
// two-atom measure).
std::vector<double> brownian_exit_oracle(double lo, double hi, std::size_t n,
                                         std::uint64_t seed, double dt = 1e-6);

enum class Suite { mainthm, logconcave, unilc, compact, restart, derivatives, all };
std::optional<Suite> suite_from_name(const std::string& name);

struct SuiteParams {
  std::size_t n_paths = 10000;
  SimConfig sim;
  Hypotheses hyp;
  double restart_s = 0.1;
  std::size_t restart_n = 5000;
  int n_threads = 0;
};

// Runs the selected suite.  Statistical checks that fail get exactly one
// automatic reseeded rerun; the rerun's verdict is final.
std::vector<CheckReport> run_suite(Suite suite, const Measure& mu, const SuiteParams& params);

}  // namespace skoflow
