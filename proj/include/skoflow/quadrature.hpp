#pragma once

#include <array>
#include <vector>

namespace skoflow {

// One smooth piece of a tilted integrand: weight (w0 + w1 x) times
// exp(g0 + g1 x + g2 x^2) on [lo, hi].  The measure's density factor is folded
// into either the weight (piecewise-linear densities) or the exponent
// (exponential/Gaussian densities).
struct ExpPiece {
  double lo, hi;
  double w0, w1;
  double g0, g1, g2;  // g2 <= 0
};

// Result of integrating sum of pieces against (1, u, u^2, u^3), u = x - center,
// after factoring exp(shift) out of the integrand.
struct QuadMoments {
  double log_norm;   // log of integral of component 0 (includes the shift)
  double mean;       // center + I1/I0
  double var;        // central variance about the true mean
  double m3;         // central third moment
  double rel_err;    // achieved relative error estimate on component 0
};

// Adaptive Gauss-Kronrod 7-15 over the pieces, computed in the log domain
// (integrand exponents are shifted by their global max before exponentiation).
// Throws Error(quadrature_failure) if the requested accuracy cannot be met.
QuadMoments integrate_exp_pieces(const std::vector<ExpPiece>& pieces, double center,
                                 double rel_tol = 5e-13);

}  // namespace skoflow
