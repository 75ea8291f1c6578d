#pragma once

#include <optional>
#include <string>

#include "nmsg/core.hpp"
#include "nmsg/problems.hpp"

namespace nmsg {

/// Classical prefixed step sizes used as baselines.
enum class StepRuleKind {
  ConstantStep,            // alpha_k = a
  ConstantLength,          // alpha_k = a / ||s_k||
  NonsummableDiminishing,  // alpha_k = a / sqrt(k)
  SquareSummable,          // alpha_k = a / k
};

struct StepRule {
  StepRuleKind kind = StepRuleKind::ConstantStep;
  double a = 0.1;

  /// Step size for iteration k (1-based) given ||s_k|| > 0.
  double alpha(std::size_t k, double snorm) const;

  /// The four baseline settings: 0.1, 0.2/||s||, 0.1/sqrt(k), 0.5/k.
  static StepRule constant_step(double a = 0.1) { return {StepRuleKind::ConstantStep, a}; }
  static StepRule constant_length(double a = 0.2) { return {StepRuleKind::ConstantLength, a}; }
  static StepRule nonsummable(double a = 0.1) { return {StepRuleKind::NonsummableDiminishing, a}; }
  static StepRule square_summable(double a = 0.5) { return {StepRuleKind::SquareSummable, a}; }
};

/// CLI method names: constant, fixedlength, nonsum, sqrsum.
const char* method_name(StepRuleKind kind);
StepRule step_rule_from_method(const std::string& method);

/// Projected subgradient method with the non-monotone line search.
///
/// Starts from P_C(x0), or P_C(0) when no start point is given. Stops when the
/// oracle returns an exactly zero subgradient, after cfg.max_iters iterations,
/// or when the line search or oracle breaks down (partial trace kept).
RunReport solve_nonmonotone(const ProblemSpec& problem, const SolverConfig& cfg,
                            const std::optional<Point>& x0 = std::nullopt);

/// x_{k+1} = P_C(x_k - alpha_k s_k) with alpha_k from `rule`.
RunReport solve_prefixed(const ProblemSpec& problem, const StepRule& rule, std::size_t max_iters,
                         const std::optional<Point>& x0 = std::nullopt);

}  // namespace nmsg
