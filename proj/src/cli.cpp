#include "nmsg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "nmsg/analysis.hpp"
#include "nmsg/solver.hpp"

namespace nmsg::cli {
namespace {

using io::format_double;
using io::json;

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

RunReport run_method(const ProblemSpec& problem, const std::string& method, const SolverConfig& cfg) {
  if (method == "nonmonotone") return solve_nonmonotone(problem, cfg);
  return solve_prefixed(problem, step_rule_from_method(method), cfg.max_iters);
}

// Solver flags shared by `run` and `check`.
struct ConfigFlags {
  std::string config_path;
  std::string gamma_kind = "sqrt_inverse";
  std::optional<double> zeta, theta, c, beta, rho, alpha1;
  std::optional<std::size_t> iters, backtrack_cap;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "solver configuration JSON");
    app->add_option("--gamma", gamma_kind, "gamma sequence kind")
        ->check(CLI::IsMember({"sqrt_inverse", "power_inverse", "strongly_convex"}));
    app->add_option("--zeta", zeta, "gamma_k = zeta/sqrt(k) scale");
    app->add_option("--theta", theta, "exponent for power_inverse gamma");
    app->add_option("--c", c);
    app->add_option("--beta", beta);
    app->add_option("--rho", rho);
    app->add_option("--alpha1", alpha1);
    app->add_option("--iters", iters, "iteration budget");
    app->add_option("--backtrack-cap", backtrack_cap);
  }

  SolverConfig build(const ProblemSpec& problem) const {
    SolverConfig cfg = config_path.empty() ? SolverConfig{}
                                           : io::config_from_json(io::parse_json(io::read_file(config_path)));
    if (c) cfg.c = *c;
    if (beta) cfg.beta = *beta;
    if (rho) cfg.rho = *rho;
    if (alpha1) cfg.alpha1 = *alpha1;
    if (iters) cfg.max_iters = *iters;
    if (backtrack_cap) cfg.backtrack_cap = *backtrack_cap;
    const bool gamma_flags = zeta || theta || gamma_kind != "sqrt_inverse";
    if (!config_path.empty() && !gamma_flags) return cfg;
    if (gamma_kind == "sqrt_inverse") {
      cfg.gamma = GammaSequence::sqrt_inverse(zeta.value_or(1.0));
    } else if (gamma_kind == "power_inverse") {
      if (!theta) throw InvalidArgument("--gamma power_inverse needs --theta");
      cfg.gamma = GammaSequence::power_inverse(zeta.value_or(1.0), *theta);
    } else {
      if (!problem.sigma) throw InvalidArgument("--gamma strongly_convex needs an instance with sigma > 0");
      const auto tc = theory_constants_for(problem, cfg);
      if (!tc) throw InvalidArgument("--gamma strongly_convex needs a finite Lipschitz bound and rho > 1/2");
      cfg.gamma = GammaSequence::strongly_convex_harmonic(*problem.sigma, cfg.beta, tc->theta);
    }
    return cfg;
  }
};

int usage_error(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return kExitUsage;
}

// ---------------------------------------------------------------------------

int cmd_gen(const std::string& kind, std::uint64_t seed, Eigen::Index n, Eigen::Index m, bool planted,
            Eigen::Index active, double spread, double x_scale, double sigma, const std::string& set_kind,
            std::optional<double> radius, double scale, const std::string& anchors,
            const std::string& out) {
  io::InstanceFile file;
  if (kind == "maxaffine") {
    MaxAffineInstance inst;
    if (planted) {
      PlantOptions opts;
      opts.n = n;
      opts.m = m;
      opts.active = active;
      opts.spread = spread;
      opts.x_scale = x_scale;
      opts.sigma = sigma;
      inst = plant_optimum_max_affine(seed, opts);
      file.optimum = inst.planted;
    } else {
      inst = random_max_affine(seed, n, m);
      inst.sigma = sigma;
    }
    file.instance = inst;
  } else {
    FermatWeberInstance inst = anchors.empty() ? random_fermat_weber(seed, n, m, scale) : load_anchor_csv(anchors);
    if (planted) {
      const auto ref = weiszfeld(inst);
      file.optimum = PlantedOptimum{ref.x_star, ref.f_star};
    }
    file.instance = inst;
  }

  const Eigen::Index dim = file.dim();
  const double star_norm = file.optimum ? file.optimum->x_star.norm() : 0.0;
  const double star_max = file.optimum ? file.optimum->x_star.cwiseAbs().maxCoeff() : 0.0;
  if (set_kind == "ball") {
    file.set = SetDescriptor::ball(Point::Zero(dim), radius.value_or(star_norm + 1.0));
  } else if (set_kind == "box") {
    const double r = radius.value_or(star_max + 1.0);
    file.set = SetDescriptor::box(Point::Constant(dim, -r), Point::Constant(dim, r));
  }
  if (file.optimum && !file.set.contains(file.optimum->x_star))
    throw InvalidArgument("gen: constraint set does not contain the reference optimum");

  const std::string text = io::instance_to_json(file).dump(2) + "\n";
  if (out.empty() || out == "-") std::cout << text;
  else io::write_file_atomic(out, text);
  return kExitOk;
}

int cmd_run(const std::string& instance_path, const std::string& method, const ConfigFlags& flags,
            const std::string& out, const std::string& format) {
  const io::InstanceFile file = io::read_instance(instance_path);
  const ProblemSpec problem = file.problem();
  const SolverConfig cfg = flags.build(problem);
  for (const auto& w : validate_config(cfg).warnings) std::cerr << "warning: " << w << "\n";

  const RunReport report = run_method(problem, method, cfg);
  const json summary = io::summary_to_json(report, problem.f_star);
  if (!out.empty()) {
    if (format == "json") {
      io::write_file_atomic(out + ".json", io::report_to_json(report, problem.f_star).dump(2) + "\n");
    } else {
      io::write_file_atomic(out + ".csv", io::trace_csv(report, problem.f_star));
    }
    io::write_file_atomic(out + ".summary.json", summary.dump(2) + "\n");
  } else if (format == "json") {
    std::cout << io::report_to_json(report, problem.f_star).dump(2) << "\n";
    return kExitOk;
  } else {
    io::write_trace_csv(std::cout, report, problem.f_star);
    return kExitOk;
  }
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_check(const std::string& trace_path, const std::string& instance_path, const ConfigFlags& flags,
              const std::string& out) {
  const io::InstanceFile file = io::read_instance(instance_path);
  const ProblemSpec problem = file.problem();
  SolverConfig cfg = flags.build(problem);
  const RunReport trace = io::read_trace_csv_file(trace_path, cfg.beta);
  if (trace.records.empty()) throw ParseError("trace '" + trace_path + "' has no rows");
  for (const auto& r : trace.records)
    if (r.x.size() != problem.dim)
      throw ParseError("trace has " + std::to_string(r.x.size()) + " coordinates, instance has " +
                       std::to_string(problem.dim));
  cfg.max_iters = std::max(cfg.max_iters, trace.records.size());
  validate_config(cfg);

  const auto tc = theory_constants_for(problem, cfg);
  AuditReport audit = audit_stepwise(trace, problem, cfg, tc);
  audit.append(audit_rate_bounds(trace, problem, cfg, tc));

  for (const auto& c : audit.checks) {
    std::cout << (c.status == CheckStatus::Fail ? "FAIL " : c.status == CheckStatus::Pass ? "PASS " : "SKIP ")
              << c.name;
    if (c.status != CheckStatus::Skipped)
      std::cout << "  worst=" << format_double(c.worst_violation) << " at " << c.worst_index;
    else
      std::cout << "  (" << c.note << ")";
    std::cout << "\n";
  }
  const std::string text = io::audit_to_json(audit).dump(2) + "\n";
  if (!out.empty()) io::write_file_atomic(out, text);
  if (!audit.passed()) {
    std::cerr << "audit failed:";
    for (const auto& n : audit.failed()) std::cerr << " " << n;
    std::cerr << "\n";
    return kExitAuditFailure;
  }
  return kExitOk;
}

int cmd_bench(const std::string& plan_path, const std::string& out_dir) {
  BenchPlan plan = read_bench_plan(plan_path);
  if (!out_dir.empty()) plan.output_dir = out_dir;
  const auto tables = run_bench(plan);
  for (const auto& p : write_bench(plan, tables)) std::cout << p << "\n";
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& all_methods() {
  static const std::vector<std::string> m{"nonmonotone", "constant", "fixedlength", "nonsum", "sqrsum"};
  return m;
}

BenchPlan parse_bench_plan(const json& j) {
  if (!j.is_object()) throw ParseError("bench plan: expected a JSON object");
  BenchPlan plan;
  for (const auto& [key, _] : j.items())
    if (key != "problem" && key != "methods" && key != "solver" && key != "instance" &&
        key != "output_dir" && key != "configs")
      throw ParseError("bench plan: unknown key '" + key + "'");
  plan.problem = j.value("problem", std::string("maxaffine"));
  if (plan.problem != "maxaffine" && plan.problem != "fermat_weber")
    throw ParseError("bench plan: unknown problem '" + plan.problem + "'");
  if (j.contains("methods")) {
    for (const auto& m : j["methods"]) {
      const std::string name = m.get<std::string>();
      if (std::find(all_methods().begin(), all_methods().end(), name) == all_methods().end())
        throw ParseError("bench plan: unknown method '" + name + "'");
      plan.methods.push_back(name);
    }
  } else {
    plan.methods = all_methods();
  }
  if (plan.methods.empty()) throw ParseError("bench plan: no methods");
  if (j.contains("solver")) plan.solver = io::config_from_json(j["solver"]);
  if (j.contains("instance")) {
    const json& in = j["instance"];
    plan.spread = in.value("spread", plan.spread);
    plan.x_scale = in.value("x_scale", plan.x_scale);
    plan.anchor_scale = in.value("scale", plan.anchor_scale);
    if (in.contains("anchors_csv")) plan.anchors_csv = in["anchors_csv"].get<std::string>();
  }
  plan.output_dir = j.value("output_dir", plan.output_dir);
  if (!j.contains("configs") || !j["configs"].is_array() || j["configs"].empty())
    throw ParseError("bench plan: 'configs' must be a non-empty array");
  for (const auto& c : j["configs"]) {
    BenchConfig bc;
    bc.n = c.value("n", bc.n);
    bc.m = c.value("m", bc.m);
    bc.zeta = c.value("zeta", bc.zeta);
    bc.iters = c.value("iters", bc.iters);
    if (c.contains("seeds"))
      for (const auto& s : c["seeds"]) bc.seeds.push_back(s.get<std::uint64_t>());
    if (bc.seeds.empty()) throw ParseError("bench plan: every config needs at least one seed");
    if (bc.iters < 1) throw ParseError("bench plan: iters must be >= 1");
    if (bc.n < 1 || bc.m < 1) throw ParseError("bench plan: n and m must be >= 1");
    if (!(bc.zeta > 0.0)) throw ParseError("bench plan: zeta must be > 0");
    plan.configs.push_back(std::move(bc));
  }
  return plan;
}

BenchPlan read_bench_plan(const std::string& path) {
  try {
    return parse_bench_plan(io::parse_json(io::read_file(path)));
  } catch (const json::exception& e) {
    throw ParseError(std::string("bench plan: ") + e.what());
  }
}

std::vector<BenchTable> run_bench(const BenchPlan& plan) {
  std::vector<BenchTable> tables;
  for (const auto& bc : plan.configs) {
    BenchTable table;
    table.config = bc;
    std::ostringstream name;
    name << plan.problem << "_n" << bc.n << "_m" << bc.m << "_z" << format_double(bc.zeta) << ".csv";
    table.file_name = name.str();

    std::vector<BenchRow> rows;
    for (const auto seed : bc.seeds) {
      std::optional<ProblemSpec> problem;
      std::string setup_error;
      try {
        if (plan.problem == "maxaffine") {
          PlantOptions opts;
          opts.n = bc.n;
          opts.m = bc.m;
          opts.spread = plan.spread;
          opts.x_scale = plan.x_scale;
          problem = make_problem(plant_optimum_max_affine(seed, opts), SetDescriptor::whole_space());
        } else {
          const FermatWeberInstance inst = plan.anchors_csv ? load_anchor_csv(*plan.anchors_csv)
                                                            : random_fermat_weber(seed, bc.n, bc.m, plan.anchor_scale);
          const auto ref = weiszfeld(inst);
          problem = make_problem(inst, SetDescriptor::whole_space(), PlantedOptimum{ref.x_star, ref.f_star});
        }
      } catch (const Error& e) {
        setup_error = e.what();
      }
      for (const auto& method : plan.methods) {
        BenchRow row;
        row.method = method;
        row.seed = std::to_string(seed);
        if (!problem) {
          row.status = "error: " + setup_error;
          rows.push_back(std::move(row));
          continue;
        }
        try {
          SolverConfig cfg = plan.solver;
          cfg.gamma = GammaSequence::sqrt_inverse(bc.zeta);
          cfg.max_iters = bc.iters;
          const RunReport rep = run_method(*problem, method, cfg);
          row.status = rep.termination == Termination::BacktrackFailure ? "error: " + rep.message : "ok";
          row.f_best = rep.f_best;
          row.f_star = *problem->f_star;
          row.gap = rep.f_best - *problem->f_star;
          row.it_best = static_cast<double>(rep.it_best);
          if (!rep.records.empty()) row.x_best = rep.records[rep.it_best - 1].x;
        } catch (const Error& e) {
          row.status = std::string("error: ") + e.what();
        }
        rows.push_back(std::move(row));
      }
    }
    // Median rows over successful seeds.
    for (const auto& method : plan.methods) {
      std::vector<double> gaps, its;
      for (const auto& r : rows)
        if (r.method == method && r.status == "ok") {
          gaps.push_back(r.gap);
          its.push_back(r.it_best);
        }
      BenchRow agg;
      agg.method = method;
      agg.seed = "median";
      agg.status = gaps.empty() ? "error: no successful runs" : "ok";
      agg.gap = median(gaps);
      agg.it_best = median(its);
      agg.f_best = std::nan("");
      agg.f_star = std::nan("");
      rows.push_back(std::move(agg));
    }
    table.rows = std::move(rows);
    tables.push_back(std::move(table));
  }
  return tables;
}

std::string bench_table_csv(const BenchPlan& plan, const BenchTable& table) {
  const bool with_x = plan.problem == "fermat_weber";
  Eigen::Index n = 0;
  if (with_x)
    for (const auto& r : table.rows) n = std::max(n, r.x_best.size());
  std::ostringstream os;
  os << "n,m,zeta,iters,method,seed,status,f_best,f_star,gap,it_best";
  for (Eigen::Index i = 1; i <= n; ++i) os << ",x" << i;
  os << "\n";
  for (const auto& r : table.rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    os << table.config.n << ',' << table.config.m << ',' << format_double(table.config.zeta) << ','
       << table.config.iters << ',' << r.method << ',' << r.seed << ',' << status << ','
       << format_double(r.f_best) << ',' << format_double(r.f_star) << ',' << format_double(r.gap) << ','
       << format_double(r.it_best);
    for (Eigen::Index i = 0; i < n; ++i)
      os << ',' << (i < r.x_best.size() ? format_double(r.x_best[i]) : std::string());
    os << "\n";
  }
  return os.str();
}

std::string bench_overview_csv(const BenchPlan& plan, const std::vector<BenchTable>& tables) {
  std::ostringstream os;
  os << "config";
  for (const auto& m : plan.methods) os << ',' << m << "_gap," << m << "_it_best";
  os << "\n";
  for (const auto& t : tables) {
    os << "n=" << t.config.n << " m=" << t.config.m;
    for (const auto& m : plan.methods) {
      const auto it = std::find_if(t.rows.begin(), t.rows.end(),
                                   [&](const BenchRow& r) { return r.method == m && r.seed == "median"; });
      os << ',' << format_double(it->gap) << ',' << format_double(it->it_best);
    }
    os << "\n";
  }
  return os.str();
}

std::vector<std::string> write_bench(const BenchPlan& plan, const std::vector<BenchTable>& tables) {
  std::vector<std::string> paths;
  const std::filesystem::path dir(plan.output_dir);
  for (const auto& t : tables) {
    const auto p = (dir / t.file_name).string();
    io::write_file_atomic(p, bench_table_csv(plan, t));
    paths.push_back(p);
  }
  const auto p = (dir / (plan.problem + "_overview.csv")).string();
  io::write_file_atomic(p, bench_overview_csv(plan, tables));
  paths.push_back(p);
  return paths;
}

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args) {
  CLI::App app{"Projected subgradient method with non-monotone line search"};
  app.require_subcommand(1);

  std::string kind = "maxaffine", out, set_kind = "rn", anchors;
  std::uint64_t seed = 0;
  Eigen::Index n = 2, m = 10, active = 0;
  bool planted = false;
  double spread = 1.0, x_scale = 1.0, sigma = 0.0, scale = 10.0;
  std::optional<double> radius;
  auto* gen = app.add_subcommand("gen", "generate a problem instance");
  gen->add_option("kind", kind, "maxaffine | fermat_weber")
      ->check(CLI::IsMember({"maxaffine", "fermat_weber"}));
  gen->add_option("--seed", seed);
  gen->add_option("--n", n)->check(CLI::PositiveNumber);
  gen->add_option("--m", m)->check(CLI::PositiveNumber);
  gen->add_flag("--planted", planted, "attach a certified optimum (Weiszfeld for fermat_weber)");
  gen->add_option("--active", active, "active pieces at the planted optimum (default n+1)");
  gen->add_option("--spread", spread);
  gen->add_option("--x-scale", x_scale);
  gen->add_option("--sigma", sigma, "strong convexity modulus added as (sigma/2)||x||^2");
  gen->add_option("--set", set_kind)->check(CLI::IsMember({"rn", "box", "ball"}));
  gen->add_option("--radius", radius, "ball radius / box half-width");
  gen->add_option("--scale", scale, "anchor spread for fermat_weber");
  gen->add_option("--anchors", anchors, "lat,lon CSV of anchors");
  gen->add_option("--out", out, "output path (stdout when omitted)");

  std::string instance, method = "nonmonotone", format = "csv", run_out;
  ConfigFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "solve an instance and emit its trace");
  run_cmd->add_option("--instance", instance)->required();
  run_cmd->add_option("--method", method)->check(CLI::IsMember(all_methods()));
  run_cmd->add_option("--out", run_out, "output prefix: <out>.csv|json and <out>.summary.json");
  run_cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  run_flags.attach(run_cmd);

  std::string plan_path, bench_out;
  auto* bench = app.add_subcommand("bench", "run a benchmark plan");
  bench->add_option("plan", plan_path)->required();
  bench->add_option("--out", bench_out, "output directory (overrides the plan)");

  std::string trace, check_instance, check_out;
  ConfigFlags check_flags;
  auto* check = app.add_subcommand("check", "audit a trace against the theory");
  check->add_option("--trace", trace)->required();
  check->add_option("--instance", check_instance)->required();
  check->add_option("--out", check_out, "audit JSON path");
  check_flags.attach(check);

  std::vector<std::string> argv_store{"nmsg"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen)
      return cmd_gen(kind, seed, n, m, planted, active, spread, x_scale, sigma, set_kind, radius, scale,
                     anchors, out);
    if (*run_cmd) return cmd_run(instance, method, run_flags, run_out, format);
    if (*bench) return cmd_bench(plan_path, bench_out);
    if (*check) return cmd_check(trace, check_instance, check_flags, check_out);
  } catch (const Error& e) {
    return usage_error(e.what());
  } catch (const std::exception& e) {
    return usage_error(e.what());
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}

}  // namespace nmsg::cli
