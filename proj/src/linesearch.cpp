#include "nmsg/linesearch.hpp"

#include <cmath>
#include <string>

namespace nmsg {

LineSearchOutcome nonmonotone_backtrack(const ProblemSpec& problem, const Point& x_k, double f_k,
                                        const Point& s_k, double alpha_k, double gamma_k,
                                        const SolverConfig& cfg) {
  if (!(alpha_k > 0.0)) throw InvalidArgument("line search: alpha_k must be positive");
  if (!(gamma_k > 0.0)) throw InvalidArgument("line search: gamma_k must be positive");
  const double snorm2 = s_k.squaredNorm();
  if (snorm2 == 0.0) throw InvalidArgument("line search: zero subgradient");
  if (!std::isfinite(snorm2) || !std::isfinite(f_k))
    throw BacktrackFailure("line search: ||s_k||^2 or f(x_k) is not finite");

  const double cap_step = cfg.c * cfg.beta * gamma_k;
  LineSearchOutcome out;
  // trial = beta^(ell-1) alpha_k, the candidate alpha_{k+1}
  double trial = alpha_k;
  for (std::size_t ell = 1; ell <= cfg.backtrack_cap; ++ell, trial *= cfg.beta) {
    const double step = cfg.beta * trial;
    if (step > cap_step) continue;
    Point x = project(problem.set, x_k - step * s_k);
    ++out.trials;
    Evaluation e = problem.evaluate(x);
    if (e.value <= f_k - cfg.rho * step * snorm2 + gamma_k) {
      out.ell = static_cast<int>(ell);
      out.x_next = std::move(x);
      out.f_next = e.value;
      out.s_next = std::move(e.subgrad);
      out.alpha_next = trial;
      out.step = step;
      return out;
    }
  }
  throw BacktrackFailure("line search: no acceptable step within " +
                         std::to_string(cfg.backtrack_cap) + " trials");
}

}  // namespace nmsg
