#include "skoflow/flow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "skoflow/errors.hpp"
#include "skoflow/stats.hpp"

namespace skoflow {

namespace {

PathState state_from_moments(double t, double w, TiltParams tilt, const TiltedMoments& m) {
  PathState s;
  s.t = t;
  s.w = w;
  s.tilt = tilt;
  s.a = m.a;
  s.A = m.A;
  s.m3 = m.m3;
  s.log_V = m.log_V;
  return s;
}

// Integrates db/dt = A^-2 across one step, with w interpolated linearly
// between the Brownian endpoints.  Relative changes of A per (sub)step above
// 2% get a midpoint evaluation; above 10% the step is subdivided.
double integrate_b(const TiltedMeasure& h, const PathState& s, double w_new, double dt) {
  double b = s.tilt.b;
  double A = s.A;
  double c_hint = s.tilt.c;
  double done = 0.0;
  for (int guard = 0; guard < 256 && done < dt; ++guard) {
    const double remaining = dt - done;
    const double rate = 1.0 / (A * A);
    const double delta = remaining * rate * A;  // relative impact on A
    if (delta <= 0.02) {
      b += remaining * rate;
      break;
    }
    const double h_sub = (delta <= 0.10) ? remaining : remaining * (0.10 / delta);
    const double frac_mid = (done + 0.5 * h_sub) / dt;
    const double w_mid = s.w + (w_new - s.w) * frac_mid;
    const double b_half = b + 0.5 * h_sub * rate;
    TiltedMoments mid;
    c_hint = solve_c(h, w_mid, b_half, c_hint, 1e-10, &mid);
    b += h_sub / (mid.A * mid.A);
    A = mid.A;
    done += h_sub;
  }
  return b;
}

PathState step_a(const TiltedMeasure& h, const PathState& s, double dW, double dt) {
  const Interval hull = support_hull(h);
  const double w_new = s.w + dW;
  if (w_new <= hull.lo || w_new >= hull.hi)
    fail(errc::target_outside_hull, "w left the support hull");
  if (dt == 0.0 && dW == 0.0) return s;
  const double b_new = dt > 0.0 ? integrate_b(h, s, w_new, dt) : s.tilt.b;
  TiltedMoments m;
  const double c_new = solve_c(h, w_new, b_new, s.tilt.c, 1e-10, &m);
  return state_from_moments(s.t + dt, w_new, {b_new, c_new}, m);
}

PathState step_b(const TiltedMeasure& h, const PathState& s, double dW, double dt) {
  const double inv_A = 1.0 / s.A;
  const TiltParams next{s.tilt.b + dt * inv_A * inv_A,
                        s.tilt.c + dW * inv_A + dt * s.a * inv_A * inv_A};
  TiltOptions opts;
  opts.center_hint = s.a;
  const auto m = tilted_moments(h, next, opts);
  return state_from_moments(s.t + dt, s.w + dW, next, m);
}

struct ProbeSet {
  std::array<double, 3> xs;
};

ProbeSet make_probes(const TiltedMeasure& h) {
  return {{quantile(h.base, 0.1), quantile(h.base, 0.5), quantile(h.base, 0.9)}};
}

std::array<double, 3> probe_F(const PathState& s, const ProbeSet& probes) {
  std::array<double, 3> out;
  for (int i = 0; i < 3; ++i) {
    const double x = probes.xs[i];
    out[i] = std::exp(s.tilt.c * x - 0.5 * s.tilt.b * x * x - s.log_V);
  }
  return out;
}

}  // namespace

PathState initial_state(const TiltedMeasure& h, TiltParams init) {
  check_integrable(h.base, compose(h.offset, init));
  const auto m = tilted_moments(h, init);
  return state_from_moments(0.0, m.a, init, m);
}

PathState step(const TiltedMeasure& h, const PathState& s, double dW, double dt,
               Scheme scheme) {
  return scheme == Scheme::a_root_driven ? step_a(h, s, dW, dt) : step_b(h, s, dW, dt);
}

PathResult simulate_path(const TiltedMeasure& h, const SimConfig& cfg, TiltParams init,
                         RngStream& rng) {
  PathResult res;

  std::vector<double> cps = cfg.checkpoint_times;
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());

  if (h.base.is_dirac) {
    res.T_hat = 0.0;
    res.W_T = h.base.points.front();
    res.stop_reason = StopReason::a_below_eps;
    res.tau_diag = 1.0;
    for (double tc : cps)
      res.checkpoints.push_back({tc, 0.0, res.W_T, 0.0, 0.0, 0.0, 0.0, {1.0, 1.0, 1.0}});
    return res;
  }

  const ProbeSet probes = make_probes(h);
  PathState s = initial_state(h, init);
  const double var_eff = s.A;
  const double eps_A = cfg.eps_A >= 0.0 ? cfg.eps_A : 1e-6 * var_eff;
  const double t_max = cfg.t_max >= 0.0 ? cfg.t_max : 50.0 * var_eff;

  double tau_hit = -1.0;
  const auto note_state = [&](const PathState& st) {
    if (tau_hit < 0.0 && st.A >= 2.0) tau_hit = st.t;
    res.max_A = std::max(res.max_A, st.A);
    if (st.tilt.b > 0.0) res.max_Ab = std::max(res.max_Ab, st.A * st.tilt.b);
    if (st.A > 0.0)
      res.max_S_ratio = std::max(res.max_S_ratio, std::abs(st.m3) / std::pow(st.A, 1.5));
  };
  note_state(s);

  std::size_t next_cp = 0;
  const auto record_live = [&](const PathState& st, double tc) {
    res.checkpoints.push_back({tc, st.t, st.w, st.tilt.b, st.tilt.c, st.A,
                               st.A > 0.0 ? st.m3 / st.A : 0.0, probe_F(st, probes)});
  };
  while (next_cp < cps.size() && cps[next_cp] <= 0.0) {
    record_live(s, cps[next_cp]);
    ++next_cp;
  }

  const auto finish = [&](StopReason reason, double T_hat, double W_T,
                          const PathState& last_good) {
    res.stop_reason = reason;
    res.T_hat = T_hat;
    res.W_T = W_T;
    res.b_final = last_good.tilt.b;
    res.c_final = last_good.tilt.c;
    res.tau_diag = (tau_hit >= 0.0) ? std::min(tau_hit, 1.0) : 1.0;
    // Stopped-path convention: remaining checkpoints carry the terminal time,
    // A = 0, and the last pre-stop density values.
    const auto F = probe_F(last_good, probes);
    for (; next_cp < cps.size(); ++next_cp)
      res.checkpoints.push_back({cps[next_cp], T_hat, W_T, last_good.tilt.b,
                                 last_good.tilt.c, 0.0, 0.0, F});
    return res;
  };

  if (s.A <= eps_A) return finish(StopReason::a_below_eps, s.A, s.w, s);

  std::uint64_t consecutive_min_steps = 0;
  while (true) {
    if (s.t >= t_max) return finish(StopReason::t_max_reached, s.t, s.w, s);
    double dt = std::clamp(cfg.eta * std::min(s.A, var_eff), kDtMin, cfg.dt_max);
    if (dt <= kDtMin) {
      if (++consecutive_min_steps > 1000000)
        return finish(StopReason::numerical_breakdown, s.t, s.w, s);
    } else {
      consecutive_min_steps = 0;
    }
    dt = std::min(dt, t_max - s.t);
    if (dt <= 0.0) return finish(StopReason::t_max_reached, s.t, s.w, s);
    bool lands_on_cp = false;
    if (next_cp < cps.size() && s.t + dt >= cps[next_cp] - 1e-15 * std::max(1.0, cps[next_cp])) {
      dt = cps[next_cp] - s.t;
      lands_on_cp = true;
    }
    const double dW = rng.normal() * std::sqrt(std::max(dt, 0.0));

    PathState nxt;
    try {
      nxt = step(h, s, dW, dt, cfg.scheme);
    } catch (const Error& e) {
      ++res.n_steps;
      if (e.code() == errc::target_outside_hull) {
        const Interval hull = support_hull(h);
        const double endpoint = (s.w + dW >= hull.hi) ? hull.hi : hull.lo;
        return finish(StopReason::hull_endpoint, s.t + dt, endpoint, s);
      }
      return finish(StopReason::numerical_breakdown, s.t, s.w, s);
    }
    ++res.n_steps;
    note_state(nxt);
    if (lands_on_cp) {
      record_live(nxt, cps[next_cp]);
      ++next_cp;
    }
    s = nxt;
    if (s.A <= eps_A) return finish(StopReason::a_below_eps, s.t + s.A, s.w, s);
  }
}

EnsembleSummary summarize(const TiltedMeasure& h, const std::vector<PathResult>& paths,
                          bool ks_against_base) {
  EnsembleSummary sum;
  sum.n = paths.size();
  std::vector<double> ts, ws;
  ts.reserve(paths.size());
  ws.reserve(paths.size());
  for (const auto& p : paths) {
    if (p.stop_reason == StopReason::t_max_reached ||
        p.stop_reason == StopReason::numerical_breakdown) {
      ++sum.n_failed;
      continue;
    }
    ts.push_back(p.T_hat);
    ws.push_back(p.W_T);
  }
  if (ts.empty()) fail(errc::all_paths_failed, "no path reached a stop");
  const auto ms = stats::mean_se(ts);
  sum.mean_T = ms.mean;
  sum.se_T = ms.se;
  sum.max_T = *std::max_element(ts.begin(), ts.end());
  if (ks_against_base) {
    const auto ks = stats::ks_vs_measure(ws, h.base);
    sum.ks_stat = ks.d;
    sum.ks_p = ks.p;
    sum.ks_valid = true;
  }
  if (ts.size() >= 10000) {
    if (const auto fit = stats::tail_fit(ts)) {
      sum.tail_rate = fit->rate;
      sum.tail_r2 = fit->r2;
    }
  }
  return sum;
}

std::pair<std::vector<PathResult>, EnsembleSummary> run_ensemble(
    const TiltedMeasure& h, const SimConfig& cfg, std::size_t n_paths, TiltParams init,
    int n_threads) {
  std::vector<PathResult> results(n_paths);
  if (n_threads <= 0)
    n_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n_threads = std::min<int>(n_threads, static_cast<int>(std::max<std::size_t>(n_paths, 1)));

  initial_state(h, init);  // validate once before spawning workers

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_paths) break;
      RngStream rng = RngStream::for_path(cfg.seed, i);
      try {
        results[i] = simulate_path(h, cfg, init, rng);
      } catch (const std::exception&) {
        results[i] = PathResult{};
        results[i].stop_reason = StopReason::numerical_breakdown;
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  EnsembleSummary sum = summarize(h, results, h.offset.b == 0.0 && h.offset.c == 0.0);
  return {std::move(results), std::move(sum)};
}

}  // namespace skoflow
