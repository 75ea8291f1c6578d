#include <cmath>
#include <limits>

#include "doctest.h"
#include "nmsg/solver.hpp"
#include "support.hpp"

using namespace nmsg;
using nmsg::test::vec;

namespace {

ProblemSpec planted(std::uint64_t seed, Eigen::Index n, Eigen::Index m,
                    const SetDescriptor& set = SetDescriptor::whole_space()) {
  PlantOptions opts;
  opts.n = n;
  opts.m = m;
  return make_problem(plant_optimum_max_affine(seed, opts), set);
}

SolverConfig with_zeta(double zeta, std::size_t iters) {
  SolverConfig cfg;
  cfg.gamma = GammaSequence::sqrt_inverse(zeta);
  cfg.max_iters = iters;
  return cfg;
}

}  // namespace

TEST_CASE("zero subgradient at the start stops immediately") {
  const auto p = test::abs_problem();
  const auto r = solve_nonmonotone(p, SolverConfig{});
  CHECK(r.termination == Termination::ZeroSubgradient);
  REQUIRE(r.records.size() == 1);
  CHECK(r.f_best == 0.0);
  CHECK(r.it_best == 1);
  CHECK(r.records[0].ell == 0);

  const auto q = solve_prefixed(p, StepRule::constant_length(), 10);
  CHECK(q.termination == Termination::ZeroSubgradient);
  CHECK(q.records.size() == 1);
}

TEST_CASE("constant step oscillates on |x|") {
  const auto r = solve_prefixed(test::abs_problem(), StepRule::constant_step(0.1), 8, vec({0.25}));
  const double expect[] = {0.25, 0.15, 0.05, -0.05, 0.05, -0.05, 0.05, -0.05};
  REQUIRE(r.records.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(r.records[i].x[0] == doctest::Approx(expect[i]).epsilon(1e-12));
  CHECK(r.f_best == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(r.it_best == 3);
  for (const auto& rec : r.records) CHECK(rec.ell == 0);
}

TEST_CASE("step rules") {
  CHECK(StepRule::nonsummable().alpha(4, 1.0) == 0.05);
  CHECK(StepRule::square_summable().alpha(5, 1.0) == 0.1);
  CHECK(StepRule::constant_step().alpha(9, 3.0) == 0.1);
  CHECK(StepRule::constant_length().alpha(1, 4.0) == 0.05);
  for (const char* m : {"constant", "fixedlength", "nonsum", "sqrsum"})
    CHECK(std::string(method_name(step_rule_from_method(m).kind)) == m);
  CHECK_THROWS_AS(step_rule_from_method("nonmonotone"), InvalidArgument);
  CHECK_THROWS_AS(solve_prefixed(test::abs_problem(), StepRule::constant_step(-1.0), 5), InvalidArgument);
}

TEST_CASE("nonmonotone run invariants") {
  const auto p = planted(4, 5, 30);
  const auto r = solve_nonmonotone(p, with_zeta(0.5, 3000));
  CHECK(r.termination == Termination::MaxIters);
  REQUIRE(r.records.size() == 3000);
  CHECK(r.records[0].x.norm() == 0.0);
  CHECK(r.records[0].alpha == 0.1);
  const SolverConfig cfg = with_zeta(0.5, 3000);
  double best = r.records[0].f;
  for (std::size_t i = 0; i + 1 < r.records.size(); ++i) {
    const auto& a = r.records[i];
    const auto& b = r.records[i + 1];
    CHECK(a.ell >= 1);
    CHECK(b.alpha == a.alpha_next);
    CHECK(a.alpha_next <= a.alpha);
    CHECK(a.alpha_next <= cfg.c * a.gamma * (1 + 1e-12));
    CHECK(a.alpha_next == doctest::Approx(std::pow(cfg.beta, a.ell - 1) * a.alpha).epsilon(1e-12));
    CHECK(b.f <= a.f - cfg.rho * cfg.beta * a.alpha_next * a.snorm * a.snorm + a.gamma + 1e-12 * std::abs(a.f));
    const double nb = std::min(best, b.f);
    CHECK(nb <= best);
    best = nb;
  }
  CHECK(r.f_best == best);
}

TEST_CASE("runs are deterministic") {
  const auto p = planted(12, 10, 50);
  const auto a = solve_nonmonotone(p, with_zeta(1.0, 500));
  const auto b = solve_nonmonotone(p, with_zeta(1.0, 500));
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].x == b.records[i].x);
    CHECK(a.records[i].f == b.records[i].f);
    CHECK(a.records[i].alpha == b.records[i].alpha);
  }
}

TEST_CASE("iterates stay feasible") {
  const auto ball = SetDescriptor::ball(vec({2.0, -1.0}), 0.5);
  const auto box = SetDescriptor::box(vec({0.5, 0.5}), vec({1.0, 2.0}));
  for (const auto& set : {ball, box, SetDescriptor::nonnegative_orthant()}) {
    const auto p = make_problem(random_max_affine(3, 2, 10), set);
    const auto r = solve_nonmonotone(p, with_zeta(1.0, 300));
    for (const auto& rec : r.records) CHECK(set.contains(rec.x));
    const auto q = solve_prefixed(p, StepRule::nonsummable(), 300);
    for (const auto& rec : q.records) CHECK(set.contains(rec.x));
  }
}

TEST_CASE("infeasible start is projected") {
  const auto set = SetDescriptor::ball(Point::Zero(2), 1.0);
  const auto p = make_problem(random_max_affine(1, 2, 5), set);
  const auto r = solve_nonmonotone(p, with_zeta(1.0, 5), vec({3.0, 4.0}));
  CHECK(r.records[0].x.isApprox(vec({0.6, 0.8})));
  CHECK_THROWS_AS(solve_nonmonotone(p, with_zeta(1.0, 5), vec({1.0})), InvalidArgument);
}

TEST_CASE("oracle breakdown keeps the partial trace") {
  ProblemSpec p;
  p.dim = 1;
  p.oracle = [](const Point& x) {
    if (x[0] < -0.5) return Evaluation{std::numeric_limits<double>::quiet_NaN(), x};
    return Evaluation{x[0], vec({1.0})};
  };
  SolverConfig cfg = with_zeta(10.0, 100);
  cfg.alpha1 = 0.3;
  const auto r = solve_nonmonotone(p, cfg);
  CHECK(r.termination == Termination::BacktrackFailure);
  CHECK_FALSE(r.message.empty());
  CHECK(r.records.size() >= 1);
  CHECK(r.records.size() < 100);
}

TEST_CASE("invalid configuration is rejected before running") {
  SolverConfig cfg;
  cfg.beta = 1.5;
  CHECK_THROWS_AS(solve_nonmonotone(test::abs_problem(), cfg), ValidationError);
}

TEST_CASE("strongly convex planted run converges") {
  PlantOptions opts;
  opts.sigma = 1.0;
  const auto inst = plant_optimum_max_affine(3, opts);
  const auto set = SetDescriptor::ball(Point::Zero(2), inst.planted->x_star.norm() + 1.0);
  const auto p = make_problem(inst, set);
  const double L = *p.lipschitz;
  SolverConfig cfg;
  cfg.max_iters = 2000;
  cfg.gamma = GammaSequence::strongly_convex_harmonic(1.0, cfg.beta, 1.0 / ((1.0 + cfg.rho) * L * L));
  const auto r = solve_nonmonotone(p, cfg);
  CHECK(r.termination == Termination::MaxIters);
  CHECK(r.f_best - *p.f_star < 1e-2);
}
