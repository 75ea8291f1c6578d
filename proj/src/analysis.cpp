#include "nmsg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nmsg {
namespace {

// Worst normalised violation of lhs <= rhs (or lhs == rhs) over a trace.
class Tracker {
 public:
  explicit Tracker(std::string name) { result_.name = std::move(name); }

  void at_most(std::size_t index, double lhs, double rhs, double scale) {
    record(index, lhs - rhs, scale);
  }

  void equal(std::size_t index, double a, double b, double scale) {
    record(index, std::abs(a - b), scale);
  }

  CheckResult finish() {
    if (result_.evaluated == 0) return skip("nothing to check");
    result_.worst_violation = worst_;
    result_.status = worst_ <= kAuditSlack ? CheckStatus::Pass : CheckStatus::Fail;
    return result_;
  }

  CheckResult skip(std::string why) {
    result_.status = CheckStatus::Skipped;
    result_.worst_violation = 0.0;
    result_.worst_index = 0;
    result_.evaluated = 0;
    result_.note = std::move(why);
    return result_;
  }

 private:
  void record(std::size_t index, double diff, double scale) {
    double v = diff / (scale > 0.0 ? scale : 1.0);
    if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
    ++result_.evaluated;
    if (result_.evaluated == 1 || v > worst_) {
      worst_ = v;
      result_.worst_index = index;
    }
  }

  CheckResult result_;
  double worst_ = -std::numeric_limits<double>::infinity();
};

double abs_sum(std::initializer_list<double> xs) {
  double s = 0.0;
  for (double x : xs) s += std::abs(x);
  return s;
}

double beta_power(double beta, int exponent) {
  double p = 1.0;
  for (int i = 0; i < exponent; ++i) p *= beta;
  return p;
}

std::optional<double> try_gamma(const GammaSequence& g, std::size_t k) {
  try {
    return gamma_value(g, k);
  } catch (const InvalidArgument&) {
    return std::nullopt;
  }
}

bool rel_equal(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

CheckResult consistency(const RunReport& report, const ProblemSpec& problem,
                        const SolverConfig& cfg) {
  Tracker t("trace_consistency");
  const bool prefixed = report.prefixed();
  const auto& recs = report.records;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    const std::size_t k = r.k;
    t.equal(k, static_cast<double>(k), static_cast<double>(i + 1), 1.0);
    if (r.x.size() != problem.dim) {
      t.equal(k, 1.0, 0.0, 1.0);
      continue;
    }
    Evaluation e;
    try {
      e = problem.evaluate(r.x);
    } catch (const Error&) {
      t.equal(k, 1.0, 0.0, 1.0);
      continue;
    }
    const double sn = e.subgrad.norm();
    t.equal(k, r.f, e.value, abs_sum({r.f, e.value}));
    t.equal(k, r.snorm, sn, abs_sum({r.snorm, sn}));
    t.equal(k, problem.set.contains(r.x, 1e-9) ? 0.0 : 1.0, 0.0, 1.0);

    const bool terminal = sn == 0.0;
    if (terminal && i + 1 != recs.size()) t.equal(k, 1.0, 0.0, 1.0);
    if (!prefixed) {
      if (const auto g = try_gamma(cfg.gamma, k)) t.equal(k, r.gamma, *g, abs_sum({r.gamma, *g}));
      else t.equal(k, 1.0, 0.0, 1.0);
      if (i == 0) t.equal(k, r.alpha, cfg.alpha1, abs_sum({r.alpha, cfg.alpha1}));
      if (!terminal) {
        if (r.ell < 1) {
          t.equal(k, 1.0, 0.0, 1.0);
          continue;
        }
        const double an = beta_power(cfg.beta, r.ell - 1) * r.alpha;
        t.equal(k, r.alpha_next, an, abs_sum({r.alpha_next, an}));
        t.equal(k, r.step, cfg.beta * r.alpha_next, abs_sum({r.step, cfg.beta * r.alpha_next}));
      }
    }
    if (terminal || i + 1 >= recs.size()) continue;
    const auto& next = recs[i + 1];
    if (!prefixed) t.equal(k, next.alpha, r.alpha_next, abs_sum({next.alpha, r.alpha_next}));
    if (next.x.size() != problem.dim) continue;
    const double step = prefixed ? r.alpha : r.step;
    const Point pred = project(problem.set, r.x - step * e.subgrad);
    t.equal(k, (pred - next.x).norm(), 0.0, r.x.norm() + step * sn + next.x.norm());
  }
  return t.finish();
}

}  // namespace

TheoryConstants theory_constants(double rho, double beta, double L, double c) {
  if (!(rho > 0.5 && rho < 1.0))
    throw InvalidArgument("theory constants: rho must lie in (1/2, 1) so that Gamma > 0");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("theory constants: beta must lie in (0,1)");
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidArgument("theory constants: L must be > 0");
  if (!(c > 0.0)) throw InvalidArgument("theory constants: c must be > 0");
  TheoryConstants tc;
  tc.theta = std::min(1.0, 1.0 / ((1.0 + rho) * L * L));
  tc.gamma_big = tc.theta * (2.0 * beta - beta / rho);
  tc.L = L;
  tc.rho = rho;
  tc.beta = beta;
  tc.c = c;
  return tc;
}

std::optional<TheoryConstants> theory_constants_for(const ProblemSpec& problem,
                                                    const SolverConfig& cfg) {
  if (!problem.lipschitz || !cfg.theory_regime()) return std::nullopt;
  return theory_constants(cfg.rho, cfg.beta, *problem.lipschitz, cfg.c);
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
  }
  return "?";
}

bool AuditReport::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed(); });
}

const CheckResult* AuditReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::vector<std::string> AuditReport::failed() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.passed()) out.push_back(c.name);
  return out;
}

void AuditReport::append(const AuditReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

// ---------------------------------------------------------------------------

AuditReport audit_stepwise(const RunReport& report, const ProblemSpec& problem,
                           const SolverConfig& cfg, const std::optional<TheoryConstants>& tc) {
  AuditReport out;
  Tracker upper("upper_sandwich");
  Tracker lower("lower_sandwich");
  Tracker decrease("sufficient_decrease");
  Tracker fejer("quasi_fejer");

  if (report.prefixed()) {
    const char* why = "prefixed step rule: no line-search law applies";
    out.checks = {upper.skip(why), lower.skip(why), decrease.skip(why), fejer.skip(why),
                  consistency(report, problem, cfg)};
    return out;
  }

  const auto& recs = report.records;
  const bool have_star = problem.x_star.has_value();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    if (r.ell < 1) continue;  // terminal record
    const std::size_t k = r.k;
    const auto gk = try_gamma(cfg.gamma, k);
    if (!gk) continue;
    const double g = *gk;

    upper.at_most(k, r.alpha_next, cfg.c * g, abs_sum({r.alpha_next, cfg.c * g}));

    if (tc) {
      if (const auto g1 = try_gamma(cfg.gamma, k + 1)) {
        const double lo = tc->theta * *g1;
        lower.at_most(k, lo, r.alpha_next, abs_sum({lo, r.alpha_next}));
      }
    }

    if (i + 1 >= recs.size()) continue;
    const auto& next = recs[i + 1];
    const double drop = cfg.rho * cfg.beta * r.alpha_next * r.snorm * r.snorm;
    decrease.at_most(k, next.f, r.f - drop + g, abs_sum({next.f, r.f, drop, g}));

    if (have_star && cfg.theory_regime()) {
      const double d0 = (r.x - *problem.x_star).squaredNorm();
      const double d1 = (next.x - *problem.x_star).squaredNorm();
      const double pert = cfg.beta * cfg.c / cfg.rho * g * g;
      fejer.at_most(k, d1, d0 + pert, abs_sum({d1, d0, pert}));
    }
  }

  out.checks.push_back(upper.finish());
  out.checks.push_back(tc ? lower.finish() : lower.skip("Lipschitz constant unknown"));
  out.checks.push_back(decrease.finish());
  if (!have_star) out.checks.push_back(fejer.skip("x* unknown"));
  else if (!cfg.theory_regime()) out.checks.push_back(fejer.skip("rho <= 1/2"));
  else out.checks.push_back(fejer.finish());
  out.checks.push_back(consistency(report, problem, cfg));
  return out;
}

// ---------------------------------------------------------------------------

AuditReport audit_rate_bounds(const RunReport& report, const ProblemSpec& problem,
                              const SolverConfig& cfg, const std::optional<TheoryConstants>& tc) {
  Tracker sum_ratio("bound_sum_ratio");
  Tracker n_gamma("bound_n_gamma");
  Tracker sqrt_log("bound_sqrt_log");
  Tracker compact("bound_compact");
  Tracker strong("bound_strongly_convex");
  AuditReport out;

  auto skip_all = [&](const std::string& why) {
    out.checks = {sum_ratio.skip(why), n_gamma.skip(why), sqrt_log.skip(why), compact.skip(why),
                  strong.skip(why)};
    return out;
  };
  if (report.prefixed()) return skip_all("prefixed step rule");
  if (!problem.x_star || !problem.f_star) return skip_all("x*/f* unknown");
  if (!tc) return skip_all("theory constants unavailable (L unknown or rho <= 1/2)");
  if (report.records.empty()) return skip_all("empty trace");

  const double f_star = *problem.f_star;
  const double Gam = tc->gamma_big;
  const double bcr = cfg.beta * cfg.c / cfg.rho;
  const double d = (report.records.front().x - *problem.x_star).squaredNorm();

  const bool is_sqrt = cfg.gamma.kind() == GammaKind::SqrtInverse;
  const double zeta = cfg.gamma.zeta();
  const auto D = problem.set.squared_diameter();
  const bool strong_ok = problem.sigma && *problem.sigma > 0.0 &&
                         cfg.gamma.kind() == GammaKind::StronglyConvexHarmonic &&
                         rel_equal(cfg.gamma.sigma(), *problem.sigma) &&
                         rel_equal(cfg.gamma.beta(), cfg.beta) &&
                         rel_equal(cfg.gamma.theta_const(), tc->theta);

  double min_gap = std::numeric_limits<double>::infinity();
  double f_at_min = 0.0;
  double sum_sq = 0.0;
  double sum_next = 0.0;
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const auto& r = report.records[i];
    const std::size_t N = i + 1;
    if (r.f - f_star < min_gap) {
      min_gap = r.f - f_star;
      f_at_min = r.f;
    }
    const auto gN = try_gamma(cfg.gamma, N);
    const auto gN1 = try_gamma(cfg.gamma, N + 1);
    if (!gN || !gN1) break;
    sum_sq += *gN * *gN;
    sum_next += *gN1;
    const double noise = std::abs(f_at_min) + std::abs(f_star);

    const double num = d + bcr * sum_sq;
    const double b1 = num / (Gam * sum_next);
    sum_ratio.at_most(N, min_gap, b1, noise + std::abs(b1));
    const double b2 = num / (Gam * static_cast<double>(N) * *gN1);
    n_gamma.at_most(N, min_gap, b2, noise + std::abs(b2));

    if (is_sqrt) {
      const double a = bcr * zeta * zeta;
      const double Nd = static_cast<double>(N);
      const double b3 = 4.0 * (d + a + a * std::log(Nd)) / (Gam * zeta * std::sqrt(Nd));
      sqrt_log.at_most(N, min_gap, b3, noise + std::abs(b3));
      if (D && N >= 2) {
        const double b4 = 4.0 * (*D + a * std::log(3.0)) / (Gam * zeta * std::sqrt(Nd + 2.0));
        compact.at_most(N, min_gap, b4, noise + std::abs(b4));
      }
    }
    if (strong_ok) {
      const double sigma = *problem.sigma;
      // Evaluated as printed; the two beta factors cancel.
      const double b5 = 8.0 * cfg.beta * cfg.c /
                        (cfg.rho * sigma * cfg.beta * tc->theta * Gam * static_cast<double>(N + 1));
      strong.at_most(N, min_gap, b5, noise + std::abs(b5));
    }
  }

  out.checks.push_back(sum_ratio.finish());
  out.checks.push_back(n_gamma.finish());
  out.checks.push_back(is_sqrt ? sqrt_log.finish() : sqrt_log.skip("gamma is not zeta/sqrt(k)"));
  if (!is_sqrt) out.checks.push_back(compact.skip("gamma is not zeta/sqrt(k)"));
  else if (!D) out.checks.push_back(compact.skip("constraint set is not compact"));
  else out.checks.push_back(compact.finish());
  out.checks.push_back(strong_ok ? strong.finish()
                                 : strong.skip("needs sigma > 0 and gamma_k = 2/(sigma beta Theta k)"));
  return out;
}

// ---------------------------------------------------------------------------

SumLemmaResult check_sum_lemmas(double a, double d, std::size_t n) {
  if (!(a > 0.0)) throw InvalidArgument("sum lemmas: a must be > 0");
  if (!(d >= 0.0)) throw InvalidArgument("sum lemmas: d must be >= 0");
  if (n < 1) throw InvalidArgument("sum lemmas: N must be >= 1");
  const double Nd = static_cast<double>(n);

  SumLemmaResult r;
  double harm = 0.0, root = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    harm += 1.0 / static_cast<double>(k);
    root += 1.0 / std::sqrt(static_cast<double>(k + 1));
  }
  r.harmonic_lhs = (d + a * harm) / root;
  r.harmonic_rhs = 4.0 * (d + a + a * std::log(Nd)) / std::sqrt(Nd);
  r.harmonic = r.harmonic_lhs <= r.harmonic_rhs;

  if (n < 2) {
    r.half_range = true;
    return r;
  }
  double hh = 0.0, hr = 0.0;
  for (std::size_t k = (n + 1) / 2; k <= n; ++k) {
    hh += 1.0 / static_cast<double>(k);
    hr += 1.0 / std::sqrt(static_cast<double>(k + 1));
  }
  r.half_lhs = (d + a * hh) / hr;
  r.half_rhs = 4.0 * (d + a * std::log(3.0)) / std::sqrt(Nd + 2.0);
  r.half_range = r.half_lhs <= r.half_rhs;
  return r;
}

SumLemmaSweep sweep_sum_lemmas(std::span<const double> a_values, std::span<const double> d_values,
                               std::size_t n_max) {
  // harm[k] = sum_{j<=k} 1/j, root[k] = sum_{j<=k} 1/sqrt(j+1)
  std::vector<double> harm(n_max + 1, 0.0), root(n_max + 1, 0.0);
  for (std::size_t k = 1; k <= n_max; ++k) {
    harm[k] = harm[k - 1] + 1.0 / static_cast<double>(k);
    root[k] = root[k - 1] + 1.0 / std::sqrt(static_cast<double>(k + 1));
  }
  SumLemmaSweep sweep;
  for (double a : a_values) {
    for (double d : d_values) {
      for (std::size_t n = 2; n <= n_max; ++n) {
        const double Nd = static_cast<double>(n);
        const std::size_t lo = (n + 1) / 2;
        const bool h = (d + a * harm[n]) / root[n] <= 4.0 * (d + a + a * std::log(Nd)) / std::sqrt(Nd);
        const bool hr = (d + a * (harm[n] - harm[lo - 1])) / (root[n] - root[lo - 1]) <=
                        4.0 * (d + a * std::log(3.0)) / std::sqrt(Nd + 2.0);
        ++sweep.cases;
        if (!h) ++sweep.harmonic_failures;
        if (!hr) ++sweep.half_range_failures;
        if ((!h || !hr) && !sweep.first_failure) sweep.first_failure = std::make_tuple(a, d, n);
      }
    }
  }
  return sweep;
}

}  // namespace nmsg
