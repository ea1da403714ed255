#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "skoflow/rng.hpp"
#include "skoflow/tilt.hpp"

namespace skoflow {

enum class Scheme { a_root_driven, b_euler };

enum class StopReason { a_below_eps, hull_endpoint, t_max_reached, numerical_breakdown };

inline const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::a_below_eps: return "a_below_eps";
    case StopReason::hull_endpoint: return "hull_endpoint";
    case StopReason::t_max_reached: return "t_max_reached";
    case StopReason::numerical_breakdown: return "numerical_breakdown";
  }
  return "?";
}

struct SimConfig {
  double dt_max = 1e-3;
  double eta = 0.05;     // target relative change of A per step
  double eps_A = -1.0;   // stop threshold on A; < 0 means 1e-6 * Var
  double t_max = -1.0;   // hard time cap; < 0 means 50 * Var
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::a_root_driven;
  std::vector<double> checkpoint_times;
};

inline constexpr double kDtMin = 1e-12;

// Running state of the flow.  a, A, m3 are always recomputed from (b, c),
// never integrated independently.
struct PathState {
  double t = 0.0;
  double w = 0.0;
  TiltParams tilt;
  double a = 0.0;
  double A = 0.0;
  double m3 = 0.0;
  double log_V = 0.0;
};

struct CheckpointRecord {
  double t_nominal;        // requested checkpoint time
  double t;                // t ∧ T̂ actually recorded
  double w, b, c, A, S;    // S = m3 / A
  std::array<double, 3> F; // tilted density at the 10/50/90% quantiles of mu
};

struct PathResult {
  double T_hat = 0.0;
  double W_T = 0.0;
  std::uint64_t n_steps = 0;
  StopReason stop_reason = StopReason::a_below_eps;
  double tau_diag = 1.0;  // min(first time A >= 2, 1)
  std::vector<CheckpointRecord> checkpoints;
  // Pathwise maxima recorded over every step, for bound checks.
  double max_A = 0.0;
  double max_Ab = 0.0;       // sup of A_t * b_t over steps with b > 0
  double max_S_ratio = 0.0;  // sup of |S_t| / sqrt(A_t)
  double b_final = 0.0, c_final = 0.0;
};

struct EnsembleSummary {
  std::size_t n = 0;
  std::size_t n_failed = 0;
  double mean_T = 0.0;
  double se_T = 0.0;
  double max_T = 0.0;
  double ks_stat = 0.0;
  double ks_p = 0.0;
  bool ks_valid = false;
  std::optional<double> tail_rate;
  std::optional<double> tail_r2;
};

PathState initial_state(const TiltedMeasure& h, TiltParams init);

// One step of either scheme.  Scheme A: exact Brownian update of w, midpoint
// integration of db/dt = A^-2, then c recovered by root-finding (a = w holds
// by construction).  Scheme B: explicit Euler on the (c, b) SDE system.
// Throws Error(target_outside_hull) when scheme A's w leaves the hull.
PathState step(const TiltedMeasure& h, const PathState& s, double dW, double dt,
               Scheme scheme);

PathResult simulate_path(const TiltedMeasure& h, const SimConfig& cfg, TiltParams init,
                         RngStream& rng);

// n_paths independent paths; path i draws from a stream derived from
// (cfg.seed, i), so a rerun with the same seed is bit-identical regardless of
// the thread count.
std::pair<std::vector<PathResult>, EnsembleSummary> run_ensemble(
    const TiltedMeasure& h, const SimConfig& cfg, std::size_t n_paths,
    TiltParams init = {}, int n_threads = 0);

EnsembleSummary summarize(const TiltedMeasure& h, const std::vector<PathResult>& paths,
                          bool ks_against_base);

}  // namespace skoflow
