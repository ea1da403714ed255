#pragma once

#include <stdexcept>
#include <string>

namespace skoflow {

enum class errc {
  not_centered,
  mass_not_one,
  infinite_variance,
  malformed_spec,
  tilt_not_integrable,
  quadrature_failure,
  target_outside_hull,
  no_convergence,
  degenerate_tilt,
  path_timeout,
  numerical_breakdown,
  all_paths_failed,
  insufficient_paths,
  missing_checkpoints,
  hypothesis_not_asserted,
  degenerate_tail,
  pilot_stopped_early,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::not_centered: return "not_centered";
    case errc::mass_not_one: return "mass_not_one";
    case errc::infinite_variance: return "infinite_variance";
    case errc::malformed_spec: return "malformed_spec";
    case errc::tilt_not_integrable: return "tilt_not_integrable";
    case errc::quadrature_failure: return "quadrature_failure";
    case errc::target_outside_hull: return "target_outside_hull";
    case errc::no_convergence: return "no_convergence";
    case errc::degenerate_tilt: return "degenerate_tilt";
    case errc::path_timeout: return "path_timeout";
    case errc::numerical_breakdown: return "numerical_breakdown";
    case errc::all_paths_failed: return "all_paths_failed";
    case errc::insufficient_paths: return "insufficient_paths";
    case errc::missing_checkpoints: return "missing_checkpoints";
    case errc::hypothesis_not_asserted: return "hypothesis_not_asserted";
    case errc::degenerate_tail: return "degenerate_tail";
    case errc::pilot_stopped_early: return "pilot_stopped_early";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace skoflow
