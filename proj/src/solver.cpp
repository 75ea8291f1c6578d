#include "nmsg/solver.hpp"

#include <cmath>

#include "nmsg/linesearch.hpp"

namespace nmsg {
namespace {

Point start_point(const ProblemSpec& problem, const std::optional<Point>& x0) {
  Point x = x0 ? *x0 : Point::Zero(problem.dim);
  if (x.size() != problem.dim) throw InvalidArgument("solver: start point has wrong dimension");
  return project(problem.set, x);
}

bool is_zero(const Point& s) { return (s.array() == 0.0).all(); }

IterationRecord terminal_record(std::size_t k, const Point& x, double f, double gamma,
                                double alpha) {
  IterationRecord r;
  r.k = k;
  r.x = x;
  r.f = f;
  r.gamma = gamma;
  r.alpha = alpha;
  r.ell = 0;
  r.step = 0.0;
  r.snorm = 0.0;
  r.alpha_next = alpha;
  return r;
}

}  // namespace

double StepRule::alpha(std::size_t k, double snorm) const {
  const double kd = static_cast<double>(k);
  switch (kind) {
    case StepRuleKind::ConstantStep: return a;
    case StepRuleKind::ConstantLength: return a / snorm;
    case StepRuleKind::NonsummableDiminishing: return a / std::sqrt(kd);
    case StepRuleKind::SquareSummable: return a / kd;
  }
  return a;
}

const char* method_name(StepRuleKind kind) {
  switch (kind) {
    case StepRuleKind::ConstantStep: return "constant";
    case StepRuleKind::ConstantLength: return "fixedlength";
    case StepRuleKind::NonsummableDiminishing: return "nonsum";
    case StepRuleKind::SquareSummable: return "sqrsum";
  }
  return "?";
}

StepRule step_rule_from_method(const std::string& method) {
  if (method == "constant") return StepRule::constant_step();
  if (method == "fixedlength") return StepRule::constant_length();
  if (method == "nonsum") return StepRule::nonsummable();
  if (method == "sqrsum") return StepRule::square_summable();
  throw InvalidArgument("unknown step rule '" + method + "'");
}

RunReport solve_nonmonotone(const ProblemSpec& problem, const SolverConfig& cfg,
                            const std::optional<Point>& x0) {
  const SolverConfig conf = validate_config(cfg).config;
  RunReport report;
  report.method = "nonmonotone";
  report.records.reserve(conf.max_iters);

  Point x = start_point(problem, x0);
  double alpha = conf.alpha1;
  try {
    Evaluation e = problem.evaluate(x);
    for (std::size_t k = 1; k <= conf.max_iters; ++k) {
      const double gamma = gamma_value(conf.gamma, k);
      if (is_zero(e.subgrad)) {
        report.records.push_back(terminal_record(k, x, e.value, gamma, alpha));
        report.termination = Termination::ZeroSubgradient;
        break;
      }
      IterationRecord r;
      r.k = k;
      r.x = x;
      r.f = e.value;
      r.gamma = gamma;
      r.alpha = alpha;
      r.snorm = e.subgrad.norm();
      report.records.push_back(r);

      LineSearchOutcome ls = nonmonotone_backtrack(problem, x, e.value, e.subgrad, alpha, gamma, conf);
      auto& rec = report.records.back();
      rec.ell = ls.ell;
      rec.step = ls.step;
      rec.alpha_next = ls.alpha_next;

      x = std::move(ls.x_next);
      e = Evaluation{ls.f_next, std::move(ls.s_next)};
      alpha = ls.alpha_next;
    }
  } catch (const BacktrackFailure& err) {
    report.termination = Termination::BacktrackFailure;
    report.message = err.what();
  } catch (const OracleError& err) {
    report.termination = Termination::BacktrackFailure;
    report.message = err.what();
  }
  report.refresh_best();
  return report;
}

RunReport solve_prefixed(const ProblemSpec& problem, const StepRule& rule, std::size_t max_iters,
                         const std::optional<Point>& x0) {
  if (!(rule.a > 0.0) || !std::isfinite(rule.a))
    throw InvalidArgument("step rule: a must be positive");
  if (max_iters == 0) throw InvalidArgument("solve_prefixed: max_iters must be positive");

  RunReport report;
  report.method = method_name(rule.kind);
  report.records.reserve(max_iters);
  Point x = start_point(problem, x0);
  try {
    for (std::size_t k = 1; k <= max_iters; ++k) {
      const Evaluation e = problem.evaluate(x);
      if (is_zero(e.subgrad)) {
        report.records.push_back(terminal_record(k, x, e.value, 0.0, 0.0));
        report.termination = Termination::ZeroSubgradient;
        break;
      }
      IterationRecord r;
      r.k = k;
      r.x = x;
      r.f = e.value;
      r.snorm = e.subgrad.norm();
      r.alpha = rule.alpha(k, r.snorm);
      r.step = r.alpha;
      r.alpha_next = r.alpha;
      r.ell = 0;
      report.records.push_back(r);
      x = project(problem.set, x - r.alpha * e.subgrad);
    }
  } catch (const OracleError& err) {
    report.termination = Termination::BacktrackFailure;
    report.message = err.what();
  }
  report.refresh_best();
  return report;
}

}  // namespace nmsg
