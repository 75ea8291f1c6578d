#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nmsg/core.hpp"
#include "nmsg/io.hpp"

namespace nmsg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAuditFailure = 1;
inline constexpr int kExitUsage = 2;

/// Methods accepted by `run` and bench plans.
const std::vector<std::string>& all_methods();

struct BenchConfig {
  Eigen::Index n = 2;
  Eigen::Index m = 10;
  double zeta = 1.0;
  std::size_t iters = 3000;
  std::vector<std::uint64_t> seeds;
};

/// Benchmark plan (JSON):
///
///   {"problem": "maxaffine" | "fermat_weber",
///    "methods": ["nonmonotone", "constant", ...],        default: all five
///    "solver":  {"c":1, "beta":0.9, "rho":0.8, "alpha1":0.1},
///    "instance": {"spread":1, "x_scale":1, "scale":10, "anchors_csv":"..."},
///    "output_dir": "bench_out",
///    "configs": [{"n":2, "m":10, "zeta":0.01, "iters":3000, "seeds":[1,2,3]}]}
struct BenchPlan {
  std::string problem = "maxaffine";
  std::vector<std::string> methods;
  SolverConfig solver;
  double spread = 1.0;
  double x_scale = 1.0;
  double anchor_scale = 10.0;
  std::optional<std::string> anchors_csv;
  std::string output_dir = "bench_out";
  std::vector<BenchConfig> configs;
};

BenchPlan parse_bench_plan(const io::json& j);
BenchPlan read_bench_plan(const std::string& path);

struct BenchRow {
  std::string method;
  std::string seed;    // seed value, or "median" for the aggregate row
  std::string status;  // ok | error: ...
  double f_best = 0.0;
  double f_star = 0.0;
  double gap = 0.0;
  double it_best = 0.0;
  Point x_best;
};

struct BenchTable {
  BenchConfig config;
  std::string file_name;
  std::vector<BenchRow> rows;
};

/// Runs every (config, seed, method); failed runs become error rows.
std::vector<BenchTable> run_bench(const BenchPlan& plan);

/// One CSV per config: config columns, method, seed, status, f_best, f_star,
/// gap, it_best (+ x1..xn of the best iterate for Fermat-Weber).
std::string bench_table_csv(const BenchPlan& plan, const BenchTable& table);
/// Median gap and it_best per (config, method), one row per config.
std::string bench_overview_csv(const BenchPlan& plan, const std::vector<BenchTable>& tables);

/// Writes the tables under plan.output_dir and returns the file paths.
std::vector<std::string> write_bench(const BenchPlan& plan, const std::vector<BenchTable>& tables);

/// Entry point shared by the `nmsg` binary and the tests. Returns the exit code.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace nmsg::cli
