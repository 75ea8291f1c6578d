#include "nmsg/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nmsg {
namespace {

std::string join_violations(const std::vector<std::string>& v) {
  std::ostringstream os;
  os << "invalid solver configuration:";
  for (const auto& s : v) os << "\n  - " << s;
  return os.str();
}

std::string with_line(const std::string& what, std::size_t line) {
  if (line == 0) return what;
  return "line " + std::to_string(line) + ": " + what;
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

ParseError::ParseError(const std::string& what, std::size_t line)
    : Error(with_line(what, line)), line_(line) {}

// ---------------------------------------------------------------------------

GammaSequence GammaSequence::sqrt_inverse(double zeta) {
  if (!positive_finite(zeta)) throw InvalidArgument("gamma: zeta must be positive");
  GammaSequence g;
  g.kind_ = GammaKind::SqrtInverse;
  g.zeta_ = zeta;
  return g;
}

GammaSequence GammaSequence::power_inverse(double zeta, double theta) {
  if (!positive_finite(zeta)) throw InvalidArgument("gamma: zeta must be positive");
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("gamma: theta must lie in (0,1)");
  GammaSequence g;
  g.kind_ = GammaKind::PowerInverse;
  g.zeta_ = zeta;
  g.theta_ = theta;
  return g;
}

GammaSequence GammaSequence::strongly_convex_harmonic(double sigma, double beta,
                                                      double theta_const) {
  if (!positive_finite(sigma)) throw InvalidArgument("gamma: sigma must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("gamma: beta must lie in (0,1)");
  if (!(theta_const > 0.0 && theta_const <= 1.0))
    throw InvalidArgument("gamma: Theta must lie in (0,1]");
  GammaSequence g;
  g.kind_ = GammaKind::StronglyConvexHarmonic;
  g.sigma_ = sigma;
  g.beta_ = beta;
  g.theta_const_ = theta_const;
  return g;
}

GammaSequence GammaSequence::explicit_table(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("gamma: explicit table is empty");
  GammaSequence g;
  g.kind_ = GammaKind::ExplicitTable;
  g.table_ = std::move(values);
  return g;
}

std::optional<std::size_t> GammaSequence::length() const noexcept {
  if (kind_ == GammaKind::ExplicitTable) return table_.size();
  return std::nullopt;
}

double GammaSequence::operator()(std::size_t k) const {
  if (k == 0) throw InvalidArgument("gamma: index k must be >= 1");
  const double kd = static_cast<double>(k);
  switch (kind_) {
    case GammaKind::SqrtInverse:
      return zeta_ / std::sqrt(kd);
    case GammaKind::PowerInverse:
      return zeta_ / std::pow(kd, 1.0 - theta_ / 2.0);
    case GammaKind::StronglyConvexHarmonic:
      return 2.0 / (sigma_ * beta_ * theta_const_ * kd);
    case GammaKind::ExplicitTable:
      if (k > table_.size())
        throw InvalidArgument("gamma: index " + std::to_string(k) + " past explicit table of length " +
                              std::to_string(table_.size()));
      return table_[k - 1];
  }
  return std::numeric_limits<double>::quiet_NaN();
}

const char* to_string(GammaKind kind) {
  switch (kind) {
    case GammaKind::SqrtInverse: return "sqrt_inverse";
    case GammaKind::PowerInverse: return "power_inverse";
    case GammaKind::StronglyConvexHarmonic: return "strongly_convex";
    case GammaKind::ExplicitTable: return "table";
  }
  return "?";
}

GammaKind gamma_kind_from_string(const std::string& name) {
  if (name == "sqrt_inverse") return GammaKind::SqrtInverse;
  if (name == "power_inverse") return GammaKind::PowerInverse;
  if (name == "strongly_convex") return GammaKind::StronglyConvexHarmonic;
  if (name == "table") return GammaKind::ExplicitTable;
  throw InvalidArgument("unknown gamma kind '" + name + "'");
}

double gamma_value(const GammaSequence& seq, std::size_t k) {
  const double g = seq(k);
  if (!positive_finite(g))
    throw InvalidArgument("gamma: non-positive value at k=" + std::to_string(k));
  return g;
}

SequenceDiagnostics sequence_diagnostics(const GammaSequence& seq, std::size_t n) {
  if (n < 2) throw InvalidArgument("sequence_diagnostics: N must be >= 2");
  SequenceDiagnostics d;
  d.n = n;
  double sum_sq = 0.0;
  double sum_next = 0.0;
  double sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double g = gamma_value(seq, k);
    sum_sq += g * g;
    sum += g;
    sum_next += gamma_value(seq, k + 1);
  }
  d.r3 = sum_sq / sum_next;
  d.r4 = sum_sq / (static_cast<double>(n) * gamma_value(seq, n + 1));
  d.s5 = sum_sq;
  d.s6 = sum;
  return d;
}

// ---------------------------------------------------------------------------

ValidatedConfig validate_config(const SolverConfig& cfg) {
  std::vector<std::string> bad;
  if (!positive_finite(cfg.c)) bad.push_back("c must be positive");
  if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) bad.push_back("beta out of range (0,1)");
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) bad.push_back("rho out of range (0,1)");
  if (!positive_finite(cfg.alpha1)) bad.push_back("alpha1 must be positive");
  if (cfg.max_iters == 0) bad.push_back("max_iters must be positive");
  if (cfg.backtrack_cap == 0) bad.push_back("backtrack_cap must be positive");

  if (cfg.gamma.kind() == GammaKind::ExplicitTable) {
    const auto& t = cfg.gamma.table();
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!positive_finite(t[i])) {
        bad.push_back("gamma table entry " + std::to_string(i + 1) + " is not positive");
        break;
      }
    }
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (t[i] > t[i - 1]) {
        bad.push_back("gamma table increases at k=" + std::to_string(i + 1) +
                      " (non-monotone table)");
        break;
      }
    }
    // gamma_{N+1} enters the last iteration's bookkeeping.
    if (t.size() < cfg.max_iters + 1)
      bad.push_back("gamma table shorter than max_iters + 1");
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));

  ValidatedConfig out{cfg, cfg.theory_regime(), {}};
  if (!out.theory_regime)
    out.warnings.push_back("rho <= 1/2: line search is well defined but rate bounds need rho > 1/2");
  return out;
}

// ---------------------------------------------------------------------------

const char* to_string(Termination t) {
  switch (t) {
    case Termination::MaxIters: return "max_iters";
    case Termination::ZeroSubgradient: return "zero_subgradient";
    case Termination::BacktrackFailure: return "backtrack_failure";
  }
  return "?";
}

Termination termination_from_string(const std::string& name) {
  if (name == "max_iters") return Termination::MaxIters;
  if (name == "zero_subgradient") return Termination::ZeroSubgradient;
  if (name == "backtrack_failure") return Termination::BacktrackFailure;
  throw InvalidArgument("unknown termination '" + name + "'");
}

bool RunReport::prefixed() const {
  if (!method.empty()) return method != "nonmonotone";
  return std::all_of(records.begin(), records.end(),
                     [](const IterationRecord& r) { return r.ell == 0; });
}

void RunReport::refresh_best() {
  f_best = std::numeric_limits<double>::infinity();
  it_best = 0;
  for (const auto& r : records) {
    if (r.f < f_best) {
      f_best = r.f;
      it_best = r.k;
    }
  }
}

}  // namespace nmsg
