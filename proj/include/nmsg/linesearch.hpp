#pragma once

#include <cstddef>

#include "nmsg/core.hpp"
#include "nmsg/problems.hpp"

namespace nmsg {

struct LineSearchOutcome {
  int ell = 0;           // accepted exponent, >= 1
  Point x_next;          // P_C(x_k - beta^ell alpha_k s_k)
  double f_next = 0.0;
  Point s_next;          // oracle subgradient at x_next
  double alpha_next = 0.0;  // beta^(ell-1) alpha_k
  double step = 0.0;        // beta^ell alpha_k
  std::size_t trials = 0;   // candidate points evaluated
};

/// Non-monotone backtracking: the smallest ell >= 1 with
///
///   beta^ell alpha_k <= c beta gamma_k
///   f(P_C(x_k - beta^ell alpha_k s_k)) <= f(x_k) - rho beta^ell alpha_k ||s_k||^2 + gamma_k
///
/// Trials run ell = 1, 2, ...; the first condition is checked before the
/// oracle is called. Throws BacktrackFailure past cfg.backtrack_cap and
/// OracleError if the objective is non-finite at a trial point.
LineSearchOutcome nonmonotone_backtrack(const ProblemSpec& problem, const Point& x_k, double f_k,
                                        const Point& s_k, double alpha_k, double gamma_k,
                                        const SolverConfig& cfg);

}  // namespace nmsg
