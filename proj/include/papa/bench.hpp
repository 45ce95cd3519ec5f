#pragma once

#include "papa/baselines.hpp"
#include "papa/composite.hpp"
#include "papa/problem.hpp"
#include "papa/solver.hpp"
#include "papa/trace.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace papa {

// One CSV row. `objective` is the unlifted objective, `f_template` is F(z^k)
// and `dist` is dist_K(Ax^k + By^k − c).
struct TraceRow {
  Index k = 0;
  double objective = 0, rel_obj_residual = 0, feasibility = 0, rho = 0, tau = 0,
         wall_ms = 0, f_template = 0, dist = 0;
};

inline constexpr const char* kTraceHeader =
    "k,objective,rel_obj_residual,feasibility,rho,tau,wall_ms,f_template,dist";

// |P − F*|/max(1, |F*|); NaN without a reference value.
std::vector<TraceRow> trace_rows(const ConvergenceTrace<double>& tr,
                                 std::optional<double> f_star);
std::string trace_csv(const std::vector<TraceRow>& rows);
std::vector<TraceRow> parse_trace_csv(const std::string& text);
std::vector<TraceRow> read_trace_csv(const std::string& path);

// Dense matrix from a headerless, comma-separated, row-major CSV file.
Mat<double> read_matrix_csv(const std::string& path);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// Constants for the rate certificates of one run.
struct OracleInfo {
  double f_star = 0, f_star_error = 0, lambda_norm = 0;
  double rho0 = 0, gamma0 = 0, normB_sq = 0, L_h = 0, L_f = 0;
  double x0_dist = 0, y0_dist = 0;
  bool scvx = false;
  std::string source;
};

std::string oracle_json(const OracleInfo& o);
OracleInfo parse_oracle_json(const std::string& text);
OracleInfo oracle_info(const ConvergenceTrace<double>& tr, const Reference<double>& ref,
                       double L_f = 0);

enum class Theorem { t1, t2, t3, c1 };
Theorem parse_theorem(const std::string& name);
const char* theorem_name(Theorem t);

struct BoundReport {
  std::optional<Theorem> theorem;  // empty when no certificate applies
  bool skipped = false;
  bool pass = false;
  Index checked = 0;
  Index violations = 0;
  double worst_slack = 0;  // relative: (bound − value)/max(1, |bound|)
  Index worst_k = -1;
  std::string notice;
};

// Evaluates the named bounds at every row with k ≥ max(1, k_from).
BoundReport check_bounds(const std::vector<TraceRow>& rows,
                         const std::optional<OracleInfo>& oracle, Theorem theorem,
                         double tolerance = 1e-8, Index k_from = 1);

// Least-squares slope of log(value) against log(k) for k ∈ [from, to].
// Nonpositive or non-finite values are skipped and counted in `skipped`.
double rate_slope(const std::vector<Index>& k, const std::vector<double>& value,
                  Index from, Index to, Index* skipped = nullptr);
double rate_slope(const std::vector<TraceRow>& rows, Index from, Index to,
                  const std::string& column = "rel_obj_residual",
                  Index* skipped = nullptr);

enum class SolverType { papa, baseline, composite };

struct SolverSpec {
  std::string name;
  SolverType type = SolverType::papa;
  SolverConfig<double> papa;
  BaselineConfig<double> baseline;
  CompositeScheme scheme = CompositeScheme::dr_plain;
  std::optional<double> composite_rho0;
  std::optional<Theorem> theorem;  // default chosen from the solver
  bool check = true;               // false disables the bound check
};

struct ExperimentConfig {
  std::string kind;  // qp, elastic-sqrt, sqrt-lasso, tv, sqrt-composite
  std::map<std::string, double> params;
  std::uint64_t seed = 1;
  Index budget = 1000;
  std::vector<SolverSpec> solvers;
  std::string oracle = "auto";  // auto, enumeration, active-set, crosscheck, none
  Index crosscheck_budget = 20000;
  Index window_from = 0, window_to = 0;  // default [budget/4, budget]
  bool record_timing = false;
};

// Throws ConfigError for unknown benchmarks, solvers or fields.
ExperimentConfig parse_experiment(const std::string& json, bool paper_scale = false,
                                  std::optional<std::uint64_t> seed = std::nullopt);

ProblemInstance<double> build_instance(const ExperimentConfig& cfg);

struct SolverReport {
  std::string name, method, trace_file;
  Index iterations = 0;
  double final_objective = 0, final_rel_residual = 0, final_feasibility = 0;
  std::optional<double> objective_slope, feasibility_slope;
  Index iterations_to_tol = -1;  // first k with residual and feasibility ≤ 1e−8
  BoundReport bounds;
  std::optional<OracleInfo> oracle;
  std::vector<std::string> notes;
  std::vector<TraceRow> rows;
};

struct ExperimentResult {
  std::string instance;  // regeneration record
  std::optional<Reference<double>> reference;
  bool low_confidence = false;
  std::vector<SolverReport> solvers;
  Index window_from = 0, window_to = 0;
  std::uint64_t seed = 0;
  Index budget = 0;
  std::vector<std::string> notes;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);
std::string summary_json(const ExperimentResult& r);
// Writes <name>.csv, <name>.oracle.json, instance.json and summary.json.
void write_experiment(const ExperimentResult& r, const std::string& out_dir);

}  // namespace papa
