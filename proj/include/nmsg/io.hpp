#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

#include "nmsg/analysis.hpp"
#include "nmsg/core.hpp"
#include "nmsg/problems.hpp"

namespace nmsg::io {

using nlohmann::json;

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Parses JSON text, mapping syntax errors to ParseError with a line number.
json parse_json(const std::string& text);

// -- solver configuration ----------------------------------------------------
//
// {"c":1, "beta":0.9, "rho":0.8, "alpha1":0.1,
//  "gamma":{"kind":"sqrt_inverse","zeta":1},
//  "max_iters":3000, "backtrack_cap":500, "seed":0}
//
// gamma kinds: sqrt_inverse{zeta}, power_inverse{zeta,theta},
// strongly_convex{sigma,beta,Theta}, table{values}.

json config_to_json(const SolverConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
SolverConfig config_from_json(const json& j);

// -- instances ---------------------------------------------------------------

struct InstanceFile {
  Instance instance;
  SetDescriptor set = SetDescriptor::whole_space();
  std::optional<PlantedOptimum> optimum;

  ProblemSpec problem() const { return make_problem(instance, set, optimum); }
  Eigen::Index dim() const;
};

json set_to_json(const SetDescriptor& set);
SetDescriptor set_from_json(const json& j);

json instance_to_json(const InstanceFile& inst);
InstanceFile instance_from_json(const json& j);

void write_instance(const std::string& path, const InstanceFile& inst);
InstanceFile read_instance(const std::string& path);

// -- traces ------------------------------------------------------------------
//
// Header: k,f[,fbest_gap],alpha,ell,gamma,snorm,x1..xn
// fbest_gap is the running min of f minus f*, present when f* is known.

void write_trace_csv(std::ostream& os, const RunReport& report,
                     std::optional<double> f_star = std::nullopt);
std::string trace_csv(const RunReport& report, std::optional<double> f_star = std::nullopt);

/// Rebuilds records from a trace; step and alpha_next are derived from the
/// alpha column of the following row (beta * alpha_{k+1} and alpha_{k+1}).
/// The final row of an line-search trace has no successor, so its
/// alpha_next is reconstructed as beta^(ell-1) * alpha.
RunReport read_trace_csv(std::istream& is, double beta);
RunReport read_trace_csv_file(const std::string& path, double beta);

json summary_to_json(const RunReport& report, std::optional<double> f_star = std::nullopt);
json report_to_json(const RunReport& report, std::optional<double> f_star = std::nullopt);

// -- audits ------------------------------------------------------------------

json audit_to_json(const AuditReport& audit);

}  // namespace nmsg::io
