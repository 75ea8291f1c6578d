#include "nmsg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace nmsg::io {
namespace {

json point_to_json(const Point& p) {
  json a = json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p[i]);
  return a;
}

Point point_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + ": expected an array of numbers");
  Point p(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(std::string(what) + ": expected numbers");
    p[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return p;
}

// rows x cols matrix from an array of equal-length arrays
Matrix rows_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ParseError(std::string(what) + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Point first = point_from_json(j[0], what);
  Matrix M(rows, first.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Point row = point_from_json(j[static_cast<std::size_t>(r)], what);
    if (row.size() != first.size()) throw ParseError(std::string(what) + ": ragged rows");
    M.row(r) = row.transpose();
  }
  return M;
}

json rows_to_json(const Matrix& M) {
  json a = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) a.push_back(point_to_json(M.row(r).transpose()));
  return a;
}

double number(const json& j, const char* key) {
  if (!j.is_number()) throw ParseError(std::string("'") + key + "' must be a number");
  return j.get<double>();
}

std::size_t count(const json& j, const char* key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw ParseError(std::string("'") + key + "' must be a non-negative integer");
  return j.get<std::size_t>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* what) {
  const std::set<std::string> ok(known.begin(), known.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ParseError(std::string(what) + ": unknown key '" + key + "'");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line, const std::string& column) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e)
    throw ParseError("column '" + column + "': cannot parse '" + s + "' as a number", line);
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + static_cast<std::size_t>(
                              std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
    throw ParseError(std::string("malformed JSON: ") + e.what(), line);
  }
}

// ---------------------------------------------------------------------------

json config_to_json(const SolverConfig& cfg) {
  json g;
  const auto& seq = cfg.gamma;
  g["kind"] = to_string(seq.kind());
  switch (seq.kind()) {
    case GammaKind::SqrtInverse:
      g["zeta"] = seq.zeta();
      break;
    case GammaKind::PowerInverse:
      g["zeta"] = seq.zeta();
      g["theta"] = seq.theta();
      break;
    case GammaKind::StronglyConvexHarmonic:
      g["sigma"] = seq.sigma();
      g["beta"] = seq.beta();
      g["Theta"] = seq.theta_const();
      break;
    case GammaKind::ExplicitTable:
      g["values"] = seq.table();
      break;
  }
  return json{{"c", cfg.c},
              {"beta", cfg.beta},
              {"rho", cfg.rho},
              {"alpha1", cfg.alpha1},
              {"gamma", g},
              {"max_iters", cfg.max_iters},
              {"backtrack_cap", cfg.backtrack_cap},
              {"seed", cfg.seed}};
}

SolverConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("config: expected a JSON object");
  reject_unknown(j, {"c", "beta", "rho", "alpha1", "gamma", "max_iters", "backtrack_cap", "seed"},
                 "config");
  SolverConfig cfg;
  if (j.contains("c")) cfg.c = number(j["c"], "c");
  if (j.contains("beta")) cfg.beta = number(j["beta"], "beta");
  if (j.contains("rho")) cfg.rho = number(j["rho"], "rho");
  if (j.contains("alpha1")) cfg.alpha1 = number(j["alpha1"], "alpha1");
  if (j.contains("max_iters")) cfg.max_iters = count(j["max_iters"], "max_iters");
  if (j.contains("backtrack_cap")) cfg.backtrack_cap = count(j["backtrack_cap"], "backtrack_cap");
  if (j.contains("seed")) cfg.seed = count(j["seed"], "seed");
  if (j.contains("gamma")) {
    const json& g = j["gamma"];
    if (!g.is_object() || !g.contains("kind") || !g["kind"].is_string())
      throw ParseError("config: gamma needs a string 'kind'");
    reject_unknown(g, {"kind", "zeta", "theta", "sigma", "beta", "Theta", "values"}, "gamma");
    try {
      switch (gamma_kind_from_string(g["kind"].get<std::string>())) {
        case GammaKind::SqrtInverse:
          cfg.gamma = GammaSequence::sqrt_inverse(g.contains("zeta") ? number(g["zeta"], "zeta") : 1.0);
          break;
        case GammaKind::PowerInverse:
          cfg.gamma = GammaSequence::power_inverse(g.contains("zeta") ? number(g["zeta"], "zeta") : 1.0,
                                                   number(g.value("theta", json()), "theta"));
          break;
        case GammaKind::StronglyConvexHarmonic:
          cfg.gamma = GammaSequence::strongly_convex_harmonic(
              number(g.value("sigma", json()), "sigma"),
              g.contains("beta") ? number(g["beta"], "beta") : cfg.beta,
              number(g.value("Theta", json()), "Theta"));
          break;
        case GammaKind::ExplicitTable: {
          const Point v = point_from_json(g.value("values", json()), "gamma.values");
          cfg.gamma = GammaSequence::explicit_table(std::vector<double>(v.data(), v.data() + v.size()));
          break;
        }
      }
    } catch (const InvalidArgument& e) {
      throw ParseError(std::string("config: ") + e.what());
    }
  }
  return cfg;
}

// ---------------------------------------------------------------------------

Eigen::Index InstanceFile::dim() const {
  return std::visit([](const auto& in) { return in.dim(); }, instance);
}

json set_to_json(const SetDescriptor& set) {
  json j{{"kind", to_string(set.kind())}};
  if (set.kind() == SetKind::Box) {
    j["lo"] = point_to_json(set.lo());
    j["hi"] = point_to_json(set.hi());
  } else if (set.kind() == SetKind::Ball) {
    j["center"] = point_to_json(set.center());
    j["radius"] = set.radius();
  }
  return j;
}

SetDescriptor set_from_json(const json& j) {
  if (j.is_null()) return SetDescriptor::whole_space();
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ParseError("set: expected an object with a string 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  try {
    if (kind == "rn") return SetDescriptor::whole_space();
    if (kind == "orthant") return SetDescriptor::nonnegative_orthant();
    if (kind == "box")
      return SetDescriptor::box(point_from_json(j.value("lo", json()), "set.lo"),
                                point_from_json(j.value("hi", json()), "set.hi"));
    if (kind == "ball")
      return SetDescriptor::ball(point_from_json(j.value("center", json()), "set.center"),
                                 number(j.value("radius", json()), "radius"));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("set: ") + e.what());
  }
  throw ParseError("set: unknown kind '" + kind + "'");
}

json instance_to_json(const InstanceFile& f) {
  json j;
  std::visit(
      [&](const auto& in) {
        using T = std::decay_t<decltype(in)>;
        if constexpr (std::is_same_v<T, MaxAffineInstance>) {
          j["type"] = "maxaffine";
          j["A"] = rows_to_json(in.A);
          j["b"] = point_to_json(in.b);
          j["sigma"] = in.sigma;
          if (!in.active.empty()) j["active"] = in.active;
        } else {
          j["type"] = "fermat_weber";
          j["anchors"] = rows_to_json(in.anchors.transpose());
          j["weights"] = point_to_json(in.weights);
        }
      },
      f.instance);
  if (f.optimum) {
    j["x_star"] = point_to_json(f.optimum->x_star);
    j["f_star"] = f.optimum->f_star;
  }
  j["set"] = set_to_json(f.set);
  return j;
}

InstanceFile instance_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw ParseError("instance: expected an object with a string 'type'");
  reject_unknown(j, {"type", "A", "b", "sigma", "active", "anchors", "weights", "x_star", "f_star", "set"},
                 "instance");
  InstanceFile f;
  const std::string type = j["type"].get<std::string>();
  if (type == "maxaffine") {
    MaxAffineInstance in;
    in.A = rows_from_json(j.value("A", json()), "A");
    in.b = point_from_json(j.value("b", json()), "b");
    in.sigma = j.contains("sigma") ? number(j["sigma"], "sigma") : 0.0;
    if (j.contains("active"))
      for (const auto& v : j["active"]) in.active.push_back(v.get<Eigen::Index>());
    f.instance = std::move(in);
  } else if (type == "fermat_weber") {
    FermatWeberInstance in;
    in.anchors = rows_from_json(j.value("anchors", json()), "anchors").transpose();
    in.weights = j.contains("weights") ? point_from_json(j["weights"], "weights")
                                       : Point::Ones(in.anchors.cols());
    f.instance = std::move(in);
  } else {
    throw ParseError("instance: unknown type '" + type + "'");
  }
  if (j.contains("x_star") != j.contains("f_star"))
    throw ParseError("instance: x_star and f_star must appear together");
  if (j.contains("x_star"))
    f.optimum = PlantedOptimum{point_from_json(j["x_star"], "x_star"), number(j["f_star"], "f_star")};
  f.set = set_from_json(j.value("set", json()));

  try {
    std::visit([](const auto& in) { validate(in); }, f.instance);
    if (auto* ma = std::get_if<MaxAffineInstance>(&f.instance); ma && f.optimum) ma->planted = f.optimum;
    (void)f.problem();  // dimension and optimum consistency
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("instance: ") + e.what());
  }
  return f;
}

void write_instance(const std::string& path, const InstanceFile& inst) {
  write_file_atomic(path, instance_to_json(inst).dump(2) + "\n");
}

InstanceFile read_instance(const std::string& path) {
  return instance_from_json(parse_json(read_file(path)));
}

// ---------------------------------------------------------------------------

void write_trace_csv(std::ostream& os, const RunReport& report, std::optional<double> f_star) {
  const Eigen::Index n = report.records.empty() ? 0 : report.records.front().x.size();
  os << "k,f";
  if (f_star) os << ",fbest_gap";
  os << ",alpha,ell,gamma,snorm";
  for (Eigen::Index i = 1; i <= n; ++i) os << ",x" << i;
  os << '\n';
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : report.records) {
    best = std::min(best, r.f);
    os << r.k << ',' << format_double(r.f);
    if (f_star) os << ',' << format_double(best - *f_star);
    os << ',' << format_double(r.alpha) << ',' << r.ell << ',' << format_double(r.gamma) << ','
       << format_double(r.snorm);
    for (Eigen::Index i = 0; i < r.x.size(); ++i) os << ',' << format_double(r.x[i]);
    os << '\n';
  }
}

std::string trace_csv(const RunReport& report, std::optional<double> f_star) {
  std::ostringstream os;
  write_trace_csv(os, report, f_star);
  return os.str();
}

RunReport read_trace_csv(std::istream& is, double beta) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw ParseError("trace: empty file", 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"k", "f", "alpha", "ell", "gamma", "snorm"})
    if (!col.count(need)) throw ParseError(std::string("trace: missing column '") + need + "'", 1);
  std::vector<std::size_t> xcols;
  for (std::size_t i = 1; col.count("x" + std::to_string(i)); ++i) xcols.push_back(col["x" + std::to_string(i)]);

  RunReport rep;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw ParseError("trace: expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(cells.size()),
                       lineno);
    auto num = [&](const std::string& name) { return parse_number(cells[col[name]], lineno, name); };
    IterationRecord r;
    const double k = num("k");
    const double ell = num("ell");
    if (k < 1 || k != std::floor(k)) throw ParseError("trace: k must be a positive integer", lineno);
    if (ell < 0 || ell != std::floor(ell)) throw ParseError("trace: ell must be a non-negative integer", lineno);
    r.k = static_cast<std::size_t>(k);
    r.f = num("f");
    r.alpha = num("alpha");
    r.ell = static_cast<int>(ell);
    r.gamma = num("gamma");
    r.snorm = num("snorm");
    r.x.resize(static_cast<Eigen::Index>(xcols.size()));
    for (std::size_t i = 0; i < xcols.size(); ++i)
      r.x[static_cast<Eigen::Index>(i)] = parse_number(cells[xcols[i]], lineno, header[xcols[i]]);
    rep.records.push_back(std::move(r));
  }

  const bool prefixed = rep.prefixed();
  auto& recs = rep.records;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    auto& r = recs[i];
    if (prefixed) {
      r.alpha_next = r.alpha;
      r.step = r.snorm == 0.0 ? 0.0 : r.alpha;
    } else if (r.ell == 0) {
      r.alpha_next = r.alpha;
      r.step = 0.0;
    } else {
      if (i + 1 < recs.size()) {
        r.alpha_next = recs[i + 1].alpha;
      } else {
        double a = r.alpha;
        for (int e = 1; e < r.ell; ++e) a *= beta;
        r.alpha_next = a;
      }
      r.step = beta * r.alpha_next;
    }
  }
  rep.refresh_best();
  return rep;
}

RunReport read_trace_csv_file(const std::string& path, double beta) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace '" + path + "'");
  return read_trace_csv(in, beta);
}

json summary_to_json(const RunReport& report, std::optional<double> f_star) {
  json j{{"method", report.method},
         {"f_best", report.f_best},
         {"it_best", report.it_best},
         {"iterations", report.records.size()},
         {"termination", to_string(report.termination)}};
  if (f_star) j["gap"] = report.f_best - *f_star;
  if (!report.records.empty()) {
    const auto& best = report.records[report.it_best == 0 ? 0 : report.it_best - 1];
    j["x_best"] = point_to_json(best.x);
  }
  if (!report.message.empty()) j["message"] = report.message;
  return j;
}

json report_to_json(const RunReport& report, std::optional<double> f_star) {
  json j = summary_to_json(report, f_star);
  json recs = json::array();
  for (const auto& r : report.records) {
    recs.push_back(json{{"k", r.k},
                        {"x", point_to_json(r.x)},
                        {"f", r.f},
                        {"gamma", r.gamma},
                        {"alpha", r.alpha},
                        {"ell", r.ell},
                        {"step", r.step},
                        {"snorm", r.snorm},
                        {"alpha_next", r.alpha_next}});
  }
  j["records"] = std::move(recs);
  return j;
}

json audit_to_json(const AuditReport& audit) {
  json checks = json::object();
  for (const auto& c : audit.checks) {
    json e{{"pass", c.passed()},
           {"status", to_string(c.status)},
           {"worst_violation", c.worst_violation},
           {"worst_index", c.worst_index},
           {"evaluated", c.evaluated}};
    if (!c.note.empty()) e["note"] = c.note;
    checks[c.name] = std::move(e);
  }
  return json{{"pass", audit.passed()}, {"checks", std::move(checks)}};
}

}  // namespace nmsg::io
