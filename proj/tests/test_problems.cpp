#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nmsg/problems.hpp"
#include "support.hpp"

using namespace nmsg;
using nmsg::test::vec;

namespace {

std::vector<SetDescriptor> all_sets(Eigen::Index n) {
  return {SetDescriptor::whole_space(), SetDescriptor::box(Point::Constant(n, -1.0), Point::Constant(n, 0.5)),
          SetDescriptor::ball(Point::Constant(n, 0.3), 1.5), SetDescriptor::nonnegative_orthant()};
}

// Brute-force minimum of f over a square grid centred at c.
double grid_min(const std::function<double(const Point&)>& f, const Point& c, double half, int cells) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= cells; ++i)
    for (int j = 0; j <= cells; ++j) {
      const Point x = c + vec({-half + 2 * half * i / cells, -half + 2 * half * j / cells});
      best = std::min(best, f(x));
    }
  return best;
}

// Two-stage grid search: coarse then refined around the coarse argmin.
double grid_min_refined(const std::function<double(const Point&)>& f, const Point& c, double half) {
  Point arg = c;
  double best = std::numeric_limits<double>::infinity();
  double h = half;
  for (int stage = 0; stage < 5; ++stage) {
    const int cells = 200;
    Point next = arg;
    for (int i = 0; i <= cells; ++i)
      for (int j = 0; j <= cells; ++j) {
        const Point x = arg + vec({-h + 2 * h * i / cells, -h + 2 * h * j / cells});
        const double v = f(x);
        if (v < best) {
          best = v;
          next = x;
        }
      }
    arg = next;
    h *= 0.05;
  }
  return best;
}

}  // namespace

TEST_CASE("projection examples") {
  CHECK(project(SetDescriptor::ball(Point::Zero(2), 1.0), vec({2.0, 0.0})).isApprox(vec({1.0, 0.0})));
  CHECK(project(SetDescriptor::whole_space(), vec({-7.0, 3.0})) == vec({-7.0, 3.0}));
  CHECK(project(SetDescriptor::box(vec({0.0, 0.0}), vec({1.0, 1.0})), vec({-3.0, 0.5})) == vec({0.0, 0.5}));
  CHECK(project(SetDescriptor::nonnegative_orthant(), vec({-1.0, 2.0})) == vec({0.0, 2.0}));
  CHECK_THROWS_AS(project(SetDescriptor::ball(Point::Zero(2), 1.0), vec({1.0})), InvalidArgument);
  CHECK_THROWS_AS(SetDescriptor::box(vec({1.0}), vec({0.0})), InvalidArgument);
  CHECK_THROWS_AS(SetDescriptor::ball(vec({0.0}), 0.0), InvalidArgument);
}

TEST_CASE("projection is nonexpansive and idempotent") {
  std::mt19937_64 rng(5);
  const Eigen::Index n = 4;
  for (const auto& set : all_sets(n)) {
    int violations = 0;
    for (int i = 0; i < 1000; ++i) {
      const Point y = test::gaussian(rng, n, 3.0);
      const Point z = test::gaussian(rng, n, 3.0);
      const Point py = project(set, y), pz = project(set, z);
      if ((py - pz).norm() > (y - z).norm() * (1 + 1e-12)) ++violations;
      if ((project(set, py) - py).norm() > 1e-12 * (1 + py.norm())) ++violations;
      if (!set.contains(py)) ++violations;
      // Toward feasible points: ||P(y) - z'|| <= ||y - z'||.
      if ((py - pz).norm() > (y - pz).norm() * (1 + 1e-12)) ++violations;
    }
    CHECK_MESSAGE(violations == 0, to_string(set.kind()));
  }
}

TEST_CASE("set geometry") {
  const auto box = SetDescriptor::box(vec({-1.0, 0.0}), vec({2.0, 4.0}));
  CHECK(*box.squared_diameter() == 25.0);
  CHECK(*box.norm_bound() == doctest::Approx(std::sqrt(4.0 + 16.0)));
  const auto ball = SetDescriptor::ball(vec({3.0, 4.0}), 2.0);
  CHECK(*ball.squared_diameter() == 16.0);
  CHECK(*ball.norm_bound() == 7.0);
  CHECK_FALSE(SetDescriptor::whole_space().squared_diameter());
  CHECK_FALSE(SetDescriptor::nonnegative_orthant().norm_bound());
}

TEST_CASE("max-affine evaluation") {
  MaxAffineInstance inst;
  inst.A = Matrix(2, 1);
  inst.A << 1, -1;
  inst.b = vec({0.0, 0.0});
  const auto e = max_affine_eval(inst, vec({0.0}));
  CHECK(e.value == 0.0);
  CHECK(e.subgrad[0] == 1.0);

  const auto r = random_max_affine(3, 4, 9);
  CHECK(max_affine_eval(r, Point::Zero(4)).value == r.b.maxCoeff());
  CHECK_THROWS_AS(max_affine_eval(r, Point::Zero(3)), InvalidArgument);
}

TEST_CASE("max-affine agrees with brute-force piece evaluation") {
  std::mt19937_64 rng(17);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto inst = random_max_affine(seed, 5, 20);
    inst.sigma = seed % 2 ? 0.0 : 0.7;
    for (int t = 0; t < 50; ++t) {
      const Point x = test::gaussian(rng, 5, 2.0);
      double best = -1e300;
      int arg = -1;
      for (int j = 0; j < 20; ++j) {
        double v = 0.0;
        for (int i = 0; i < 5; ++i) v += inst.A(j, i) * x[i];
        v += inst.b[j];
        if (v > best) {
          best = v;
          arg = j;
        }
      }
      const auto e = max_affine_eval(inst, x);
      CHECK(e.value == doctest::Approx(best + 0.5 * inst.sigma * x.squaredNorm()));
      Point g = inst.A.row(arg).transpose() + inst.sigma * x;
      CHECK((e.subgrad - g).norm() <= 1e-12);
    }
  }
}

TEST_CASE("fermat-weber evaluation") {
  FermatWeberInstance two;
  two.anchors = Matrix(2, 2);
  two.anchors << 0, 3, 0, 4;
  two.weights = vec({1.0, 1.0});
  CHECK(fermat_weber_eval(two, vec({1.5, 2.0})).value == doctest::Approx(5.0));

  FermatWeberInstance one;
  one.anchors = Matrix(2, 1);
  one.anchors << 1, 2;
  one.weights = vec({2.0});
  const auto e = fermat_weber_eval(one, vec({1.0, 2.0}));
  CHECK(e.value == 0.0);
  CHECK(e.subgrad.norm() == 0.0);

  FermatWeberInstance tri;
  tri.anchors = Matrix(2, 3);
  tri.anchors << 1, -0.5, -0.5, 0, std::sqrt(3.0) / 2, -std::sqrt(3.0) / 2;
  tri.weights = vec({1.0, 1.0, 1.0});
  CHECK(fermat_weber_eval(tri, Point::Zero(2)).subgrad.norm() <= 1e-15);
}

TEST_CASE("weiszfeld basics") {
  FermatWeberInstance two;
  two.anchors = Matrix(2, 2);
  two.anchors << 0, 3, 0, 4;
  two.weights = vec({1.0, 1.0});
  CHECK(weiszfeld(two).f_star == doctest::Approx(5.0).epsilon(1e-10));

  FermatWeberInstance tri;
  tri.anchors = Matrix(2, 3);
  tri.anchors << 1, -0.5, -0.5, 0, std::sqrt(3.0) / 2, -std::sqrt(3.0) / 2;
  tri.weights = vec({1.0, 1.0, 1.0});
  CHECK(weiszfeld(tri).x_star.norm() <= 1e-6);

  // A heavy anchor is optimal and returned directly.
  FermatWeberInstance heavy = tri;
  heavy.weights = vec({5.0, 1.0, 1.0});
  const auto r = weiszfeld(heavy);
  CHECK(r.x_star == vec({1.0, 0.0}));

  FermatWeberInstance same;
  same.anchors = Matrix::Ones(2, 3);
  same.weights = vec({1.0, 1.0, 1.0});
  CHECK_THROWS_AS(weiszfeld(same), InvalidArgument);
}

TEST_CASE("weiszfeld matches a dense grid") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto inst = random_fermat_weber(seed, 2, 30, 10.0);
    const auto r = weiszfeld(inst);
    const auto f = [&](const Point& x) { return fermat_weber_eval(inst, x).value; };
    const double g = grid_min_refined(f, inst.anchors.rowwise().mean(), 20.0);
    CHECK(std::abs(r.f_star - g) <= 1e-4);
    CHECK(r.f_star <= g + 1e-9);
  }
}

TEST_CASE("planted max-affine certificate") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    PlantOptions opts;
    opts.n = 1 + static_cast<Eigen::Index>(seed % 6);
    opts.m = opts.n + 1 + static_cast<Eigen::Index>(seed % 7);
    opts.sigma = seed % 3 == 0 ? 0.8 : 0.0;
    const auto inst = plant_optimum_max_affine(seed, opts);
    REQUIRE(inst.planted);
    const Point& xs = inst.planted->x_star;
    CHECK(inst.active.size() == static_cast<std::size_t>(opts.n + 1));
    CHECK(max_affine_eval(inst, xs).value == doctest::Approx(inst.planted->f_star).epsilon(1e-13));
    Point avg = Point::Zero(opts.n);
    for (auto j : inst.active) {
      const double piece = inst.A.row(j).dot(xs) + inst.b[j] + 0.5 * inst.sigma * xs.squaredNorm();
      CHECK(piece == doctest::Approx(inst.planted->f_star).epsilon(1e-13));
      avg += inst.A.row(j).transpose() + inst.sigma * xs;
    }
    avg /= static_cast<double>(inst.active.size());
    CHECK(avg.cwiseAbs().maxCoeff() <= 1e-12);
    for (Eigen::Index j = 0; j < inst.pieces(); ++j)
      if (std::find(inst.active.begin(), inst.active.end(), j) == inst.active.end())
        CHECK(inst.A.row(j).dot(xs) + inst.b[j] < inst.planted->f_star - 0.5 * inst.sigma * xs.squaredNorm());
  }
  PlantOptions bad;
  bad.n = 3;
  bad.m = 3;
  CHECK_THROWS_AS(plant_optimum_max_affine(1, bad), InvalidArgument);
}

TEST_CASE("planted optimum survives a grid search in 2-D") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    PlantOptions opts;
    const auto inst = plant_optimum_max_affine(seed, opts);
    const auto f = [&](const Point& x) { return max_affine_eval(inst, x).value; };
    const double g = grid_min(f, inst.planted->x_star, 2.0, 400);
    CHECK(g >= inst.planted->f_star - 1e-6);
  }
}

TEST_CASE("planting is deterministic per seed") {
  PlantOptions opts;
  opts.n = 5;
  opts.m = 30;
  const auto a = plant_optimum_max_affine(9, opts), b = plant_optimum_max_affine(9, opts);
  CHECK(a.A == b.A);
  CHECK(a.b == b.b);
  CHECK(a.planted->x_star == b.planted->x_star);
  const auto c = plant_optimum_max_affine(10, opts);
  CHECK(a.A != c.A);
}

TEST_CASE("subgradient inequality") {
  std::mt19937_64 rng(23);
  const auto ma = random_max_affine(4, 3, 15);
  auto ma_sc = ma;
  ma_sc.sigma = 1.3;
  const auto fw = random_fermat_weber(4, 3, 12, 2.0);

  struct Case {
    const char* name;
    std::function<Evaluation(const Point&)> eval;
    double sigma;
  };
  const Case cases[] = {{"maxaffine", [&](const Point& x) { return max_affine_eval(ma, x); }, 0.0},
                        {"maxaffine_sc", [&](const Point& x) { return max_affine_eval(ma_sc, x); }, 1.3},
                        {"fermat_weber", [&](const Point& x) { return fermat_weber_eval(fw, x); }, 0.0}};
  for (const auto& c : cases) {
    int violations = 0;
    for (int i = 0; i < 1000; ++i) {
      // Every fifth base point sits on an anchor or a kink-prone small grid.
      Point x = test::gaussian(rng, 3, 2.0);
      if (i % 5 == 0 && std::string(c.name) == "fermat_weber") x = fw.anchors.col(i % fw.size());
      const Point y = test::gaussian(rng, 3, 2.0);
      const auto ex = c.eval(x);
      const double fy = c.eval(y).value;
      const double rhs = ex.value + ex.subgrad.dot(y - x) + 0.5 * c.sigma * (y - x).squaredNorm();
      if (fy < rhs - 1e-10 * (1 + std::abs(fy))) ++violations;
    }
    CHECK_MESSAGE(violations == 0, c.name);
  }
}

TEST_CASE("lipschitz bound") {
  MaxAffineInstance inst;
  inst.A = Matrix(2, 2);
  inst.A << 3, 4, 0, 1;
  inst.b = vec({0.0, 0.0});
  CHECK(lipschitz_bound(inst) == 5.0);
  inst.sigma = 2.0;
  CHECK(lipschitz_bound(inst, SetDescriptor::ball(Point::Zero(2), 1.5)) == 8.0);
  CHECK_THROWS_AS(lipschitz_bound(inst), InvalidArgument);

  auto fw = random_fermat_weber(1, 2, 27);
  CHECK(lipschitz_bound(fw) == 27.0);
}

TEST_CASE("lipschitz bound dominates sampled subgradients") {
  std::mt19937_64 rng(29);
  const auto ma = random_max_affine(8, 6, 40);
  auto ma_sc = ma;
  ma_sc.sigma = 0.5;
  const auto ball = SetDescriptor::ball(Point::Constant(6, 0.2), 2.0);
  const auto fw = random_fermat_weber(8, 6, 20, 3.0);
  const double l_ma = lipschitz_bound(ma), l_sc = lipschitz_bound(ma_sc, ball), l_fw = lipschitz_bound(fw);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const Point x = test::gaussian(rng, 6, 4.0);
    if (max_affine_eval(ma, x).subgrad.norm() > l_ma * (1 + 1e-12)) ++violations;
    if (fermat_weber_eval(fw, x).subgrad.norm() > l_fw * (1 + 1e-12)) ++violations;
    const Point xc = project(ball, x);
    if (max_affine_eval(ma_sc, xc).subgrad.norm() > l_sc * (1 + 1e-12)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("problem spec wiring") {
  PlantOptions opts;
  auto inst = plant_optimum_max_affine(2, opts);
  const auto p = make_problem(inst, SetDescriptor::whole_space());
  CHECK(p.dim == 2);
  CHECK(p.x_star);
  CHECK(*p.f_star == inst.planted->f_star);
  CHECK(*p.lipschitz == doctest::Approx(inst.A.rowwise().norm().maxCoeff()));
  CHECK_FALSE(p.sigma);

  CHECK_THROWS_AS(make_problem(inst, SetDescriptor::ball(Point::Zero(3), 1.0)), InvalidArgument);
  CHECK_THROWS_AS(make_problem(inst, SetDescriptor::whole_space(), PlantedOptimum{inst.planted->x_star, 99.0}),
                  InvalidArgument);

  opts.sigma = 1.0;
  const auto sc = plant_optimum_max_affine(2, opts);
  const auto unbounded = make_problem(sc, SetDescriptor::whole_space());
  CHECK_FALSE(unbounded.lipschitz);
  CHECK(*unbounded.sigma == 1.0);
  const auto bounded = make_problem(sc, SetDescriptor::ball(Point::Zero(2), 5.0));
  CHECK(bounded.lipschitz);

  ProblemSpec bad;
  bad.dim = 1;
  bad.oracle = [](const Point& x) { return Evaluation{std::nan(""), x}; };
  CHECK_THROWS_AS(bad.evaluate(vec({0.0})), OracleError);
}

TEST_CASE("anchor csv") {
  const auto dir = test::scratch_dir("anchors");
  test::spit(dir / "a.csv", "lat,lon\n12.7,47.2\n-3.1,-60.9\n# comment\n\n5,8\n");
  const auto inst = load_anchor_csv((dir / "a.csv").string());
  CHECK(inst.size() == 3);
  CHECK(inst.anchors(0, 0) == -12.0);
  CHECK(inst.anchors(1, 0) == -47.0);
  CHECK(inst.anchors(0, 1) == -3.0);
  CHECK(inst.anchors(1, 1) == -60.0);
  CHECK(inst.weights.sum() == 3.0);

  test::spit(dir / "b.csv", "1,2\n3;4\n");
  try {
    load_anchor_csv((dir / "b.csv").string());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(load_anchor_csv((dir / "missing.csv").string()), ParseError);
}
