#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nmsg/core.hpp"

namespace nmsg {

/// Objective value plus one element of the subdifferential.
struct Evaluation {
  double value = 0.0;
  Point subgrad;
};

using Oracle = std::function<Evaluation(const Point&)>;

// ---------------------------------------------------------------------------
// Constraint sets
// ---------------------------------------------------------------------------

enum class SetKind { WholeSpace, Box, Ball, NonnegativeOrthant };

/// Closed convex set with an exact Euclidean projection.
class SetDescriptor {
 public:
  static SetDescriptor whole_space();
  static SetDescriptor box(Point lo, Point hi);
  static SetDescriptor ball(Point center, double radius);
  static SetDescriptor nonnegative_orthant();

  SetKind kind() const noexcept { return kind_; }
  const Point& lo() const noexcept { return lo_; }
  const Point& hi() const noexcept { return hi_; }
  const Point& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }

  /// Dimension pinned by the descriptor, if any (Box and Ball).
  std::optional<Eigen::Index> dimension() const;

  bool contains(const Point& x, double tol = 1e-12) const;

  /// max_{x,y in C} ||x - y||^2 for compact sets.
  std::optional<double> squared_diameter() const;
  /// max_{x in C} ||x|| for compact sets.
  std::optional<double> norm_bound() const;

 private:
  SetDescriptor() = default;

  SetKind kind_ = SetKind::WholeSpace;
  Point lo_, hi_, center_;
  double radius_ = 0.0;
};

const char* to_string(SetKind kind);

Point project(const SetDescriptor& set, const Point& y);

// ---------------------------------------------------------------------------
// Problem instances
// ---------------------------------------------------------------------------

struct PlantedOptimum {
  Point x_star;
  double f_star = 0.0;
};

/// f(x) = max_j (a_j . x + b_j) + (sigma/2)||x||^2, rows of A are the a_j.
struct MaxAffineInstance {
  Matrix A;
  Point b;
  double sigma = 0.0;
  std::optional<PlantedOptimum> planted;
  /// Indices of the pieces active at the planted optimum.
  std::vector<Eigen::Index> active;

  Eigen::Index dim() const noexcept { return A.cols(); }
  Eigen::Index pieces() const noexcept { return A.rows(); }
};

/// f(x) = sum_i w_i ||x - a_i||, anchors are the columns of `anchors`.
struct FermatWeberInstance {
  Matrix anchors;  // n x m
  Point weights;

  Eigen::Index dim() const noexcept { return anchors.rows(); }
  Eigen::Index size() const noexcept { return anchors.cols(); }
};

void validate(const MaxAffineInstance& inst);
void validate(const FermatWeberInstance& inst);

/// Argmax ties go to the smallest index.
Evaluation max_affine_eval(const MaxAffineInstance& inst, const Point& x);

/// Terms whose anchor coincides with x contribute the zero subgradient.
Evaluation fermat_weber_eval(const FermatWeberInstance& inst, const Point& x);

struct PlantOptions {
  Eigen::Index n = 2;
  Eigen::Index m = 10;
  Eigen::Index active = 0;  // 0 selects n + 1
  double spread = 1.0;      // scale of the inactive-piece slacks
  double x_scale = 1.0;     // RMS norm of the planted minimiser
  double sigma = 0.0;
};

/// Random max-of-affine instance with a certified minimiser.
///
/// The first `active - 1` active gradients are N(0,1); the last one closes the
/// sum so that the equal-weight average of the active subgradients
/// a_j + sigma x* is exactly zero, i.e. 0 lies in the subdifferential at x*.
/// Inactive pieces sit strictly below f* at x*.
MaxAffineInstance plant_optimum_max_affine(std::uint64_t seed, const PlantOptions& opts);

/// Unplanted instance with A, b ~ N(0,1); no known optimum.
MaxAffineInstance random_max_affine(std::uint64_t seed, Eigen::Index n, Eigen::Index m);

/// Anchors drawn as center + scale * N(0, I), unit weights.
FermatWeberInstance random_fermat_weber(std::uint64_t seed, Eigen::Index n, Eigen::Index m,
                                        double scale = 10.0, double center = 0.0);

struct WeiszfeldResult {
  Point x_star;
  double f_star = 0.0;
  std::size_t iterations = 0;
};

/// Fixed-point iteration for the weighted geometric median. Landing on an
/// anchor triggers its optimality test; a non-optimal anchor is left by a
/// step of length `tol` along the descent direction.
WeiszfeldResult weiszfeld(const FermatWeberInstance& inst, double tol = 1e-12,
                          std::size_t max_iters = 100000);

double lipschitz_bound(const MaxAffineInstance& inst,
                       const SetDescriptor& set = SetDescriptor::whole_space());
double lipschitz_bound(const FermatWeberInstance& inst);

/// Reads "lat,lon" rows, keeps the integer parts and makes them negative.
FermatWeberInstance load_anchor_csv(const std::string& path);

// ---------------------------------------------------------------------------
// Problem specification consumed by the solvers
// ---------------------------------------------------------------------------

using Instance = std::variant<MaxAffineInstance, FermatWeberInstance>;

struct ProblemSpec {
  Oracle oracle;
  SetDescriptor set = SetDescriptor::whole_space();
  Eigen::Index dim = 0;
  std::optional<double> lipschitz;
  std::optional<double> sigma;
  std::optional<Point> x_star;
  std::optional<double> f_star;

  Evaluation evaluate(const Point& x) const;
  /// Throws InvalidArgument if f(x_star) and f_star disagree beyond 1e-12 relative.
  void check_consistency() const;
};

/// Wires an instance and a constraint set into a ProblemSpec. Known optima
/// (planted, or `f_star` supplied) are attached; L is attached when finite.
ProblemSpec make_problem(const Instance& inst, const SetDescriptor& set,
                         std::optional<PlantedOptimum> optimum = std::nullopt);

}  // namespace nmsg
