#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nmsg {

/// Iterates, subgradients and anchors are dense column vectors in R^n.
using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad parameter, index or dimension.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Configuration rejected; carries every violated constraint.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// The objective oracle produced a non-finite value or subgradient.
class OracleError : public Error {
 public:
  using Error::Error;
};

/// The non-monotone search exceeded its trial cap.
class BacktrackFailure : public Error {
 public:
  using Error::Error;
};

/// An iterative reference solver ran out of iterations.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// ---------------------------------------------------------------------------
// Non-monotonicity parameters
// ---------------------------------------------------------------------------

enum class GammaKind { SqrtInverse, PowerInverse, StronglyConvexHarmonic, ExplicitTable };

/// Positive non-increasing sequence gamma_1, gamma_2, ... (1-based).
///
/// SqrtInverse:            zeta / sqrt(k)
/// PowerInverse:           zeta / k^(1 - theta/2),  theta in (0,1)
/// StronglyConvexHarmonic: 2 / (sigma * beta * Theta * k)
/// ExplicitTable:          values[k-1]; indexing past the end is an error
class GammaSequence {
 public:
  static GammaSequence sqrt_inverse(double zeta = 1.0);
  static GammaSequence power_inverse(double zeta, double theta);
  static GammaSequence strongly_convex_harmonic(double sigma, double beta, double theta_const);
  static GammaSequence explicit_table(std::vector<double> values);

  GammaKind kind() const noexcept { return kind_; }
  double zeta() const noexcept { return zeta_; }
  double theta() const noexcept { return theta_; }
  double sigma() const noexcept { return sigma_; }
  double beta() const noexcept { return beta_; }
  /// Theta constant baked into StronglyConvexHarmonic.
  double theta_const() const noexcept { return theta_const_; }
  const std::vector<double>& table() const noexcept { return table_; }

  /// Largest valid index, or nullopt for closed-form kinds.
  std::optional<std::size_t> length() const noexcept;

  double operator()(std::size_t k) const;

 private:
  GammaSequence() = default;

  GammaKind kind_ = GammaKind::SqrtInverse;
  double zeta_ = 1.0;
  double theta_ = 0.0;
  double sigma_ = 0.0;
  double beta_ = 0.0;
  double theta_const_ = 0.0;
  std::vector<double> table_;
};

const char* to_string(GammaKind kind);
GammaKind gamma_kind_from_string(const std::string& name);

/// gamma_k for k >= 1. Throws InvalidArgument for k = 0 or a non-positive result.
double gamma_value(const GammaSequence& seq, std::size_t k);

/// Finite-N surrogates of the limit conditions on (gamma_k).
struct SequenceDiagnostics {
  std::size_t n = 0;
  double r3 = 0.0;  // sum gamma_k^2 / sum gamma_{k+1}
  double r4 = 0.0;  // sum gamma_k^2 / (N gamma_{N+1})
  double s5 = 0.0;  // sum gamma_k^2
  double s6 = 0.0;  // sum gamma_k
};

SequenceDiagnostics sequence_diagnostics(const GammaSequence& seq, std::size_t n);

// ---------------------------------------------------------------------------
// Solver configuration
// ---------------------------------------------------------------------------

struct SolverConfig {
  double c = 1.0;
  double beta = 0.9;
  double rho = 0.8;
  double alpha1 = 0.1;
  GammaSequence gamma = GammaSequence::sqrt_inverse(1.0);
  std::size_t max_iters = 3000;
  std::size_t backtrack_cap = 500;
  std::uint64_t seed = 0;

  /// rho > 1/2: the regime where Gamma > 0 and the rate bounds apply.
  bool theory_regime() const noexcept { return rho > 0.5; }
};

struct ValidatedConfig {
  SolverConfig config;
  bool theory_regime = true;
  std::vector<std::string> warnings;
};

/// Checks every range constraint; throws ValidationError listing all violations.
ValidatedConfig validate_config(const SolverConfig& cfg);

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

/// One iteration of a run. For line-search runs `alpha` is the trial size
/// entering iteration k and `alpha_next = beta^(ell-1) * alpha`. Prefixed-step
/// runs use ell = 0 and gamma = 0. A record whose subgradient vanished
/// (snorm == 0) is terminal: ell = 0, step = 0, alpha_next = alpha.
struct IterationRecord {
  std::size_t k = 0;
  Point x;
  double f = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  int ell = 0;
  double step = 0.0;
  double snorm = 0.0;
  double alpha_next = 0.0;
};

enum class Termination { MaxIters, ZeroSubgradient, BacktrackFailure };

const char* to_string(Termination t);
Termination termination_from_string(const std::string& name);

struct RunReport {
  std::string method;
  std::vector<IterationRecord> records;
  double f_best = 0.0;
  std::size_t it_best = 0;
  Termination termination = Termination::MaxIters;
  std::string message;

  /// True when the trace came from a prefixed step rule (every ell == 0).
  bool prefixed() const;
  /// Recomputes f_best / it_best from the records (first index attaining the min).
  void refresh_best();
};

}  // namespace nmsg
