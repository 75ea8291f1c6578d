#include "nmsg/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace nmsg {
namespace {

void require_dim(Eigen::Index expected, const Point& x, const char* what) {
  if (x.size() != expected)
    throw InvalidArgument(std::string(what) + ": dimension mismatch (expected " +
                          std::to_string(expected) + ", got " + std::to_string(x.size()) + ")");
}

Point randn(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Point v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// SetDescriptor
// ---------------------------------------------------------------------------

SetDescriptor SetDescriptor::whole_space() { return SetDescriptor{}; }

SetDescriptor SetDescriptor::box(Point lo, Point hi) {
  if (lo.size() == 0 || lo.size() != hi.size())
    throw InvalidArgument("box: bounds must be non-empty and of equal dimension");
  if (!lo.allFinite() || !hi.allFinite()) throw InvalidArgument("box: bounds must be finite");
  if ((lo.array() > hi.array()).any()) throw InvalidArgument("box: lo must be <= hi");
  SetDescriptor s;
  s.kind_ = SetKind::Box;
  s.lo_ = std::move(lo);
  s.hi_ = std::move(hi);
  return s;
}

SetDescriptor SetDescriptor::ball(Point center, double radius) {
  if (center.size() == 0 || !center.allFinite())
    throw InvalidArgument("ball: center must be a finite point");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball: radius must be > 0");
  SetDescriptor s;
  s.kind_ = SetKind::Ball;
  s.center_ = std::move(center);
  s.radius_ = radius;
  return s;
}

SetDescriptor SetDescriptor::nonnegative_orthant() {
  SetDescriptor s;
  s.kind_ = SetKind::NonnegativeOrthant;
  return s;
}

std::optional<Eigen::Index> SetDescriptor::dimension() const {
  switch (kind_) {
    case SetKind::Box: return lo_.size();
    case SetKind::Ball: return center_.size();
    default: return std::nullopt;
  }
}

bool SetDescriptor::contains(const Point& x, double tol) const {
  if (!x.allFinite()) return false;
  switch (kind_) {
    case SetKind::WholeSpace:
      return true;
    case SetKind::Box:
      if (x.size() != lo_.size()) return false;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] < lo_[i] - tol * (1.0 + std::abs(lo_[i]))) return false;
        if (x[i] > hi_[i] + tol * (1.0 + std::abs(hi_[i]))) return false;
      }
      return true;
    case SetKind::Ball:
      if (x.size() != center_.size()) return false;
      return (x - center_).norm() <= radius_ * (1.0 + tol) + tol;
    case SetKind::NonnegativeOrthant:
      return (x.array() >= -tol).all();
  }
  return false;
}

std::optional<double> SetDescriptor::squared_diameter() const {
  switch (kind_) {
    case SetKind::Box: return (hi_ - lo_).squaredNorm();
    case SetKind::Ball: return 4.0 * radius_ * radius_;
    default: return std::nullopt;
  }
}

std::optional<double> SetDescriptor::norm_bound() const {
  switch (kind_) {
    case SetKind::Box: return lo_.cwiseAbs().cwiseMax(hi_.cwiseAbs()).norm();
    case SetKind::Ball: return center_.norm() + radius_;
    default: return std::nullopt;
  }
}

const char* to_string(SetKind kind) {
  switch (kind) {
    case SetKind::WholeSpace: return "rn";
    case SetKind::Box: return "box";
    case SetKind::Ball: return "ball";
    case SetKind::NonnegativeOrthant: return "orthant";
  }
  return "?";
}

Point project(const SetDescriptor& set, const Point& y) {
  switch (set.kind()) {
    case SetKind::WholeSpace:
      return y;
    case SetKind::Box:
      require_dim(set.lo().size(), y, "project");
      return y.cwiseMax(set.lo()).cwiseMin(set.hi());
    case SetKind::Ball: {
      require_dim(set.center().size(), y, "project");
      const Point d = y - set.center();
      const double nd = d.norm();
      if (nd <= set.radius()) return y;
      return set.center() + (set.radius() / nd) * d;
    }
    case SetKind::NonnegativeOrthant:
      return y.cwiseMax(0.0);
  }
  return y;
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

void validate(const MaxAffineInstance& inst) {
  if (inst.A.rows() < 1 || inst.A.cols() < 1)
    throw InvalidArgument("max-affine: need m >= 1 pieces and n >= 1");
  if (inst.b.size() != inst.A.rows()) throw InvalidArgument("max-affine: b has wrong length");
  if (!inst.A.allFinite() || !inst.b.allFinite())
    throw InvalidArgument("max-affine: non-finite data");
  if (!(inst.sigma >= 0.0) || !std::isfinite(inst.sigma))
    throw InvalidArgument("max-affine: sigma must be >= 0");
  if (inst.planted) require_dim(inst.dim(), inst.planted->x_star, "max-affine x_star");
}

void validate(const FermatWeberInstance& inst) {
  if (inst.anchors.cols() < 1 || inst.anchors.rows() < 1)
    throw InvalidArgument("fermat-weber: need m >= 1 anchors and n >= 1");
  if (inst.weights.size() != inst.anchors.cols())
    throw InvalidArgument("fermat-weber: weights have wrong length");
  if (!inst.anchors.allFinite()) throw InvalidArgument("fermat-weber: non-finite anchors");
  if (!(inst.weights.array() > 0.0).all() || !inst.weights.allFinite())
    throw InvalidArgument("fermat-weber: weights must be positive");
}

Evaluation max_affine_eval(const MaxAffineInstance& inst, const Point& x) {
  require_dim(inst.dim(), x, "max_affine_eval");
  Eigen::Index best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < inst.pieces(); ++j) {
    const double v = inst.A.row(j).dot(x) + inst.b[j];
    if (v > best_val) {
      best_val = v;
      best = j;
    }
  }
  Evaluation e;
  e.value = best_val;
  e.subgrad = inst.A.row(best).transpose();
  if (inst.sigma > 0.0) {
    e.value += 0.5 * inst.sigma * x.squaredNorm();
    e.subgrad += inst.sigma * x;
  }
  return e;
}

Evaluation fermat_weber_eval(const FermatWeberInstance& inst, const Point& x) {
  require_dim(inst.dim(), x, "fermat_weber_eval");
  Evaluation e;
  e.subgrad = Point::Zero(x.size());
  for (Eigen::Index i = 0; i < inst.size(); ++i) {
    const Point d = x - inst.anchors.col(i);
    const double nd = d.norm();
    e.value += inst.weights[i] * nd;
    if (nd > 0.0) e.subgrad += (inst.weights[i] / nd) * d;
  }
  return e;
}

MaxAffineInstance plant_optimum_max_affine(std::uint64_t seed, const PlantOptions& opts) {
  const Eigen::Index n = opts.n;
  const Eigen::Index m = opts.m;
  const Eigen::Index t = opts.active == 0 ? n + 1 : opts.active;
  if (n < 1) throw InvalidArgument("plant: n must be >= 1");
  if (t < n + 1 || t > m)
    throw InvalidArgument("plant: active count must satisfy n+1 <= t <= m (t=" +
                          std::to_string(t) + ", n=" + std::to_string(n) +
                          ", m=" + std::to_string(m) + ")");
  if (!(opts.spread > 0.0)) throw InvalidArgument("plant: spread must be > 0");
  if (!(opts.sigma >= 0.0)) throw InvalidArgument("plant: sigma must be >= 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  MaxAffineInstance inst;
  inst.A.resize(m, n);
  inst.b.resize(m);
  inst.sigma = opts.sigma;

  const Point x_star = (opts.x_scale / std::sqrt(static_cast<double>(n))) * randn(rng, n);
  const double level = normal(rng);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Eigen::Index> active(order.begin(), order.begin() + t);
  std::sort(active.begin(), active.end());

  // Active gradients: sum_j (a_j + sigma x*) = 0.
  Point closing = -static_cast<double>(t) * opts.sigma * x_star;
  for (Eigen::Index i = 0; i + 1 < t; ++i) {
    const Point a = randn(rng, n);
    inst.A.row(active[i]) = a.transpose();
    closing -= a;
  }
  inst.A.row(active[t - 1]) = closing.transpose();
  for (auto j : active) inst.b[j] = level - inst.A.row(j).dot(x_star);

  std::vector<bool> is_active(static_cast<std::size_t>(m), false);
  for (auto j : active) is_active[static_cast<std::size_t>(j)] = true;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (is_active[static_cast<std::size_t>(j)]) continue;
    const Point a = randn(rng, n);
    const double slack = opts.spread * (0.1 + std::abs(normal(rng)));
    inst.A.row(j) = a.transpose();
    inst.b[j] = level - a.dot(x_star) - slack;
  }

  inst.active = std::move(active);
  inst.planted = PlantedOptimum{x_star, level + 0.5 * opts.sigma * x_star.squaredNorm()};
  return inst;
}

MaxAffineInstance random_max_affine(std::uint64_t seed, Eigen::Index n, Eigen::Index m) {
  if (n < 1 || m < 1) throw InvalidArgument("random_max_affine: need n, m >= 1");
  std::mt19937_64 rng(seed);
  MaxAffineInstance inst;
  inst.A.resize(m, n);
  for (Eigen::Index j = 0; j < m; ++j) inst.A.row(j) = randn(rng, n).transpose();
  inst.b = randn(rng, m);
  return inst;
}

FermatWeberInstance random_fermat_weber(std::uint64_t seed, Eigen::Index n, Eigen::Index m,
                                        double scale, double center) {
  if (n < 1 || m < 1) throw InvalidArgument("random_fermat_weber: need n, m >= 1");
  std::mt19937_64 rng(seed);
  FermatWeberInstance inst;
  inst.anchors.resize(n, m);
  for (Eigen::Index i = 0; i < m; ++i)
    inst.anchors.col(i) = Point::Constant(n, center) + scale * randn(rng, n);
  inst.weights = Point::Ones(m);
  return inst;
}

// ---------------------------------------------------------------------------
// Weiszfeld
// ---------------------------------------------------------------------------

namespace {

// Sum over i != j of w_i (x - a_i)/||x - a_i||, evaluated at x = a_j.
Point pull_at_anchor(const FermatWeberInstance& inst, Eigen::Index j) {
  const Point x = inst.anchors.col(j);
  Point r = Point::Zero(x.size());
  for (Eigen::Index i = 0; i < inst.size(); ++i) {
    if (i == j) continue;
    const Point d = x - inst.anchors.col(i);
    const double nd = d.norm();
    if (nd > 0.0) r += (inst.weights[i] / nd) * d;
  }
  return r;
}

double coincident_weight(const FermatWeberInstance& inst, Eigen::Index j) {
  double w = 0.0;
  for (Eigen::Index i = 0; i < inst.size(); ++i)
    if ((inst.anchors.col(i) - inst.anchors.col(j)).norm() == 0.0) w += inst.weights[i];
  return w;
}

}  // namespace

WeiszfeldResult weiszfeld(const FermatWeberInstance& inst, double tol, std::size_t max_iters) {
  validate(inst);
  if (!(tol > 0.0)) throw InvalidArgument("weiszfeld: tol must be > 0");
  const Eigen::Index m = inst.size();
  bool all_same = true;
  for (Eigen::Index i = 1; i < m && all_same; ++i)
    all_same = (inst.anchors.col(i) - inst.anchors.col(0)).norm() == 0.0;
  if (all_same) throw InvalidArgument("weiszfeld: anchors are all identical");

  // An anchor is optimal iff the pull of the remaining anchors is dominated
  // by its own weight.
  for (Eigen::Index j = 0; j < m; ++j) {
    if (pull_at_anchor(inst, j).norm() <= coincident_weight(inst, j)) {
      const Point x = inst.anchors.col(j);
      return {x, fermat_weber_eval(inst, x).value, 0};
    }
  }

  Point x = inst.anchors * inst.weights / inst.weights.sum();
  double fx = fermat_weber_eval(inst, x).value;
  for (std::size_t it = 1; it <= max_iters; ++it) {
    Point num = Point::Zero(x.size());
    double den = 0.0;
    Eigen::Index hit = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double d = (x - inst.anchors.col(i)).norm();
      if (d == 0.0) {
        hit = i;
        break;
      }
      num += (inst.weights[i] / d) * inst.anchors.col(i);
      den += inst.weights[i] / d;
    }
    Point next;
    if (hit >= 0) {
      // Non-optimal anchor (optimal ones were returned above): step off it.
      const Point pull = pull_at_anchor(inst, hit);
      next = x - tol * pull / pull.norm();
    } else {
      next = num / den;
    }
    const double fn = fermat_weber_eval(inst, next).value;
    const bool done = hit < 0 && std::abs(fx - fn) < tol;
    x = std::move(next);
    fx = fn;
    if (done) return {x, fx, it};
  }
  throw ConvergenceError("weiszfeld: no convergence within " + std::to_string(max_iters) +
                         " iterations");
}

// ---------------------------------------------------------------------------

double lipschitz_bound(const MaxAffineInstance& inst, const SetDescriptor& set) {
  validate(inst);
  double L = inst.A.rowwise().norm().maxCoeff();
  if (inst.sigma > 0.0) {
    const auto r = set.norm_bound();
    if (!r)
      throw InvalidArgument("lipschitz_bound: strongly convex max-affine is not Lipschitz on an "
                            "unbounded set");
    L += inst.sigma * *r;
  }
  return L;
}

double lipschitz_bound(const FermatWeberInstance& inst) {
  validate(inst);
  return inst.weights.sum();
}

FermatWeberInstance load_anchor_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open anchor file '" + path + "'");
  std::vector<std::pair<double, double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected 'lat,lon'", lineno);
    try {
      std::size_t p1 = 0, p2 = 0;
      const std::string s1 = line.substr(0, comma), s2 = line.substr(comma + 1);
      const double lat = std::stod(s1, &p1);
      const double lon = std::stod(s2, &p2);
      rows.emplace_back(lat, lon);
    } catch (const std::invalid_argument&) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw ParseError("non-numeric coordinate", lineno);
    } catch (const std::out_of_range&) {
      throw ParseError("coordinate out of range", lineno);
    }
  }
  if (rows.empty()) throw ParseError("anchor file '" + path + "' has no rows");
  FermatWeberInstance inst;
  inst.anchors.resize(2, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    inst.anchors(0, col) = -std::abs(std::trunc(rows[i].first));
    inst.anchors(1, col) = -std::abs(std::trunc(rows[i].second));
  }
  inst.weights = Point::Ones(inst.anchors.cols());
  return inst;
}

// ---------------------------------------------------------------------------
// ProblemSpec
// ---------------------------------------------------------------------------

Evaluation ProblemSpec::evaluate(const Point& x) const {
  Evaluation e = oracle(x);
  if (!std::isfinite(e.value) || !e.subgrad.allFinite())
    throw OracleError("oracle returned a non-finite value or subgradient");
  return e;
}

void ProblemSpec::check_consistency() const {
  if (!x_star || !f_star) return;
  const double f = oracle(*x_star).value;
  if (std::abs(f - *f_star) > 1e-12 * std::max(1.0, std::abs(*f_star)))
    throw InvalidArgument("problem: f(x_star) does not match f_star");
}

ProblemSpec make_problem(const Instance& inst, const SetDescriptor& set,
                         std::optional<PlantedOptimum> optimum) {
  ProblemSpec p;
  p.set = set;
  std::visit(
      [&](const auto& in) {
        validate(in);
        using T = std::decay_t<decltype(in)>;
        p.dim = in.dim();
        if constexpr (std::is_same_v<T, MaxAffineInstance>) {
          p.oracle = [in](const Point& x) { return max_affine_eval(in, x); };
          if (in.sigma > 0.0) p.sigma = in.sigma;
          if (in.sigma == 0.0 || set.norm_bound()) p.lipschitz = lipschitz_bound(in, set);
          if (!optimum && in.planted) optimum = in.planted;
        } else {
          p.oracle = [in](const Point& x) { return fermat_weber_eval(in, x); };
          p.lipschitz = lipschitz_bound(in);
        }
      },
      inst);
  if (const auto d = set.dimension(); d && *d != p.dim)
    throw InvalidArgument("problem: set dimension does not match instance dimension");
  if (optimum) {
    require_dim(p.dim, optimum->x_star, "problem x_star");
    p.x_star = optimum->x_star;
    p.f_star = optimum->f_star;
    p.check_consistency();
  }
  return p;
}

}  // namespace nmsg
