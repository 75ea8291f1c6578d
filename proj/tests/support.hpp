#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "nmsg/problems.hpp"

namespace nmsg::test {

/// f(x) = sum_i coef_i x_i on R^n.
inline ProblemSpec linear_problem(Point coef) {
  ProblemSpec p;
  p.dim = coef.size();
  p.oracle = [coef](const Point& x) { return Evaluation{coef.dot(x), coef}; };
  return p;
}

/// f(x) = |x| on R with subgradient sign(x), 0 at the origin.
inline ProblemSpec abs_problem() {
  ProblemSpec p;
  p.dim = 1;
  p.lipschitz = 1.0;
  p.x_star = Point::Zero(1);
  p.f_star = 0.0;
  p.oracle = [](const Point& x) {
    const double v = x[0];
    Point s(1);
    s[0] = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
    return Evaluation{std::abs(v), s};
  };
  return p;
}

inline Point vec(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

inline Point gaussian(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Point p(n);
  for (Eigen::Index i = 0; i < n; ++i) p[i] = d(rng);
  return p;
}

/// Fresh scratch directory per test binary.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("nmsg_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace nmsg::test
