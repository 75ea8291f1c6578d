#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "nmsg/core.hpp"
#include "nmsg/problems.hpp"

namespace nmsg {

/// Relative tolerance separating rounding noise from genuine violations.
inline constexpr double kAuditSlack = 1e-9;

/// Theta = min{1, 1/((1+rho) L^2)},  Gamma = Theta (2 beta - beta/rho).
struct TheoryConstants {
  double theta = 0.0;
  double gamma_big = 0.0;
  double L = 0.0;
  double rho = 0.0;
  double beta = 0.0;
  double c = 0.0;
};

/// Throws InvalidArgument unless rho in (1/2, 1), beta in (0,1), L > 0, c > 0.
TheoryConstants theory_constants(double rho, double beta, double L, double c = 1.0);

/// Constants for `cfg` and the problem's Lipschitz bound; nullopt when L is
/// unknown or rho <= 1/2.
std::optional<TheoryConstants> theory_constants_for(const ProblemSpec& problem,
                                                    const SolverConfig& cfg);

enum class CheckStatus { Pass, Fail, Skipped };

const char* to_string(CheckStatus s);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Skipped;
  /// max over the trace of (lhs - rhs) / scale; positive means violated.
  double worst_violation = 0.0;
  /// k (stepwise checks) or N (rate bounds) attaining worst_violation.
  std::size_t worst_index = 0;
  std::size_t evaluated = 0;
  std::string note;

  bool passed() const noexcept { return status != CheckStatus::Fail; }
};

struct AuditReport {
  std::vector<CheckResult> checks;

  bool passed() const noexcept;
  const CheckResult* find(const std::string& name) const;
  std::vector<std::string> failed() const;
  void append(const AuditReport& other);
};

/// Per-iteration checks on an line-search trace:
///
///   upper_sandwich      alpha_{k+1} <= c gamma_k
///   lower_sandwich      Theta gamma_{k+1} <= alpha_{k+1}          (needs L)
///   sufficient_decrease f_{k+1} <= f_k - rho beta alpha_{k+1} ||s_k||^2 + gamma_k
///   quasi_fejer         ||x_{k+1}-x*||^2 <= ||x_k-x*||^2 + (beta c/rho) gamma_k^2   (needs x*)
///   trace_consistency   recorded f, ||s||, gamma, alpha chain and x_{k+1}
///                       agree with a replay through the oracle and projector
///
/// Prefixed-step traces only get trace_consistency; the rest are skipped.
AuditReport audit_stepwise(const RunReport& report, const ProblemSpec& problem,
                           const SolverConfig& cfg, const std::optional<TheoryConstants>& tc);

/// For every prefix N, min_{k<=N} f(x_k) - f* against each applicable bound:
///
///   bound_sum_ratio       (||x1-x*||^2 + (beta c/rho) sum gamma_k^2) / (Gamma sum gamma_{k+1})
///   bound_n_gamma         same numerator over Gamma N gamma_{N+1}
///   bound_sqrt_log        4(d + a + a ln N)/(Gamma zeta sqrt N),  a = beta c zeta^2/rho
///   bound_compact         4(D + a ln 3)/(Gamma zeta sqrt(N+2)),  N >= 2, compact C
///   bound_strongly_convex 8 beta c / (rho sigma beta Theta Gamma (N+1))
///
/// The sqrt-based bounds need gamma_k = zeta/sqrt(k); the strongly convex one
/// needs gamma_k = 2/(sigma beta Theta k) built from the same Theta.
AuditReport audit_rate_bounds(const RunReport& report, const ProblemSpec& problem,
                              const SolverConfig& cfg, const std::optional<TheoryConstants>& tc);

struct SumLemmaResult {
  bool harmonic = false;    // prefix-sum ratio vs 4(d+a+a ln N)/sqrt(N)
  bool half_range = false;  // sums from ceil(N/2) vs 4(d+a ln 3)/sqrt(N+2); true when N < 2
  double harmonic_lhs = 0.0, harmonic_rhs = 0.0;
  double half_lhs = 0.0, half_rhs = 0.0;
};

/// Both sides by direct summation.
SumLemmaResult check_sum_lemmas(double a, double d, std::size_t n);

struct SumLemmaSweep {
  std::size_t cases = 0;
  std::size_t harmonic_failures = 0;
  std::size_t half_range_failures = 0;
  /// First counterexample as (a, d, N), if any.
  std::optional<std::tuple<double, double, std::size_t>> first_failure;
};

/// All (a, d, N) with N in [2, n_max], using running prefix sums.
SumLemmaSweep sweep_sum_lemmas(std::span<const double> a_values, std::span<const double> d_values,
                               std::size_t n_max);

}  // namespace nmsg
