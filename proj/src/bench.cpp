#include "papa/bench.hpp"

#include "papa/oracles.hpp"
#include "papa/papa.hpp"
#include "papa/problems.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace papa {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
using VecT = Vec<double>;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON number or null for non-finite values.
ojson num(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown field '" + k + "'");
}

template <typename E>
E lookup(const std::map<std::string, E>& table, const std::string& key,
         const std::string& what) {
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown " + what + " '" + key + "'");
  return it->second;
}

const std::map<std::string, std::map<std::string, double>>& default_params() {
  static const std::map<std::string, std::map<std::string, double>> d = {
      {"qp", {{"p2", 60}, {"n", 60}, {"strongly_convex", 1}}},
      {"elastic-sqrt",
       {{"p2", 400}, {"n", 140}, {"s", 40}, {"kappa1", 0.1}, {"kappa2", 0.01},
        {"noise_sigma", 1e-3}}},
      {"sqrt-lasso",
       {{"p2", 400}, {"n", 140}, {"s", 40}, {"kappa2", 0.01}, {"noise_sigma", 1e-3}}},
      {"tv",
       {{"height", 32}, {"width", 32}, {"sample_rate", 0.2}, {"kappa", 4.0912e-4},
        {"noise_sigma", 0}, {"constant_image", 0}}},
      {"sqrt-composite", {{"p", 200}, {"kappa1", 0.1}, {"kappa2", 0.01}}},
  };
  return d;
}

SolverSpec parse_solver(const json& j, Index idx) {
  SolverSpec s;
  const std::string where = "solver " + std::to_string(idx);
  s.name = get_or<std::string>(j, "name", "");
  if (s.name.empty()) throw ConfigError(where + ": missing name");
  for (char ch : s.name)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.'))
      throw ConfigError(where + ": name may contain only letters, digits, '-', '_' and '.'");
  const std::string type = get_or<std::string>(j, "type", "papa");
  s.type = lookup<SolverType>(
      {{"papa", SolverType::papa}, {"baseline", SolverType::baseline},
       {"composite", SolverType::composite}},
      type, "solver type");
  if (j.contains("theorem")) {
    const std::string t = j.at("theorem").get<std::string>();
    if (t == "none") s.check = false;
    else s.theorem = parse_theorem(t);
  }
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return std::nullopt;
    return j.at(key).get<double>();
  };
  switch (s.type) {
    case SolverType::papa: {
      check_keys(j, {"name", "type", "theorem", "algorithm", "rho0", "gamma0", "mu_g",
                     "normA_sq", "normB_sq", "option", "tau_rule", "x_mode", "three_term",
                     "restart_period", "shift_update", "accelerate",
                     "allow_precondition_violation", "record_diagnostics"},
                 where);
      auto& c = s.papa;
      c.algorithm = lookup<Algorithm>(
          {{"papa", Algorithm::papa}, {"scvx", Algorithm::scvx}, {"conic", Algorithm::conic}},
          get_or<std::string>(j, "algorithm", "papa"), "algorithm");
      c.rho0 = opt("rho0");
      c.gamma0 = opt("gamma0");
      c.mu_g = opt("mu_g");
      c.normA_sq = opt("normA_sq");
      c.normB_sq = opt("normB_sq");
      c.option = lookup<StepOption>(
          {{"averaging", StepOption::averaging}, {"proximal", StepOption::proximal}},
          get_or<std::string>(j, "option", "averaging"), "option");
      c.tau_rule = lookup<TauRule>(
          {{"standard", TauRule::standard}, {"tighter", TauRule::tighter}},
          get_or<std::string>(j, "tau_rule", "standard"), "tau rule");
      c.x_mode = lookup<XMode>({{"exact", XMode::exact}, {"linearized", XMode::linearized}},
                               get_or<std::string>(j, "x_mode", "exact"), "x mode");
      c.three_term = lookup<ThreeTermCase>(
          {{"auto", ThreeTermCase::automatic}, {"case-i", ThreeTermCase::case_i},
           {"case-ii", ThreeTermCase::case_ii}},
          get_or<std::string>(j, "three_term", "auto"), "three-term case");
      if (j.contains("restart_period")) c.restart_period = j.at("restart_period").get<Index>();
      c.shift_update = lookup<ShiftUpdate>(
          {{"multiplier", ShiftUpdate::multiplier}, {"additive", ShiftUpdate::additive}},
          get_or<std::string>(j, "shift_update", "multiplier"), "shift update");
      c.accelerate = get_or<bool>(j, "accelerate", true);
      c.allow_precondition_violation = get_or<bool>(j, "allow_precondition_violation", false);
      c.record_diagnostics = get_or<bool>(j, "record_diagnostics", false);
      break;
    }
    case SolverType::baseline: {
      check_keys(j, {"name", "type", "theorem", "method", "sigma", "tau", "theta", "mu",
                     "normK_sq", "inner_iters", "restart_period"},
                 where);
      auto& b = s.baseline;
      b.method = lookup<Baseline>(
          {{"cp", Baseline::cp_plain}, {"cp-plain", Baseline::cp_plain},
           {"cp-scvx", Baseline::cp_scvx}, {"vu-condat", Baseline::vu_condat},
           {"acc-prox-grad", Baseline::acc_prox_grad}},
          get_or<std::string>(j, "method", ""), "baseline method");
      b.sigma = opt("sigma");
      b.tau = opt("tau");
      b.theta = opt("theta");
      b.mu = opt("mu");
      b.normK_sq = opt("normK_sq");
      b.inner_iters = get_or<Index>(j, "inner_iters", 25);
      if (j.contains("restart_period")) b.restart_period = j.at("restart_period").get<Index>();
      break;
    }
    case SolverType::composite: {
      check_keys(j, {"name", "type", "theorem", "scheme", "rho0"}, where);
      s.scheme = lookup<CompositeScheme>(
          {{"dr-plain", CompositeScheme::dr_plain}, {"dr-scvx", CompositeScheme::dr_scvx},
           {"linop-plain", CompositeScheme::linop_plain},
           {"linop-scvx", CompositeScheme::linop_scvx},
           {"pd-plain", CompositeScheme::pd_plain}, {"pd-scvx", CompositeScheme::pd_scvx}},
          get_or<std::string>(j, "scheme", ""), "composite scheme");
      s.composite_rho0 = opt("rho0");
      break;
    }
  }
  return s;
}

std::optional<Theorem> default_theorem(const SolverSpec& s, bool has_h) {
  if (!s.check) return std::nullopt;
  if (s.theorem) return s.theorem;
  switch (s.type) {
    case SolverType::papa:
      if (has_h) return Theorem::t3;
      return s.papa.algorithm == Algorithm::scvx ? Theorem::t2 : Theorem::t1;
    case SolverType::composite:
      if (s.scheme == CompositeScheme::dr_plain || s.scheme == CompositeScheme::dr_scvx)
        return Theorem::c1;
      return std::nullopt;
    case SolverType::baseline: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------- traces

std::vector<TraceRow> trace_rows(const ConvergenceTrace<double>& tr,
                                 std::optional<double> f_star) {
  std::vector<TraceRow> rows;
  rows.reserve(tr.records.size());
  for (const auto& r : tr.records) {
    TraceRow row;
    row.k = r.k;
    row.objective = r.original;
    row.rel_obj_residual =
        f_star ? std::abs(r.original - *f_star) / std::max(1.0, std::abs(*f_star)) : kNaN;
    row.feasibility = r.feasibility;
    row.rho = r.rho;
    row.tau = r.tau;
    row.wall_ms = r.wall_ms;
    row.f_template = r.objective;
    row.dist = r.dist;
    rows.push_back(row);
  }
  return rows;
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.k);
    for (double v : {r.objective, r.rel_obj_residual, r.feasibility, r.rho, r.tau, r.wall_ms,
                     r.f_template, r.dist}) {
      out += ',';
      out += fmt(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<TraceRow> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trace CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw ConfigError("trace CSV header mismatch: '" + line + "'");
  std::vector<TraceRow> rows;
  Index lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9)
      throw ConfigError("trace CSV line " + std::to_string(lineno) + ": expected 9 fields");
    TraceRow r;
    r.k = std::stoll(cells[0]);
    double* dst[] = {&r.objective, &r.rel_obj_residual, &r.feasibility, &r.rho, &r.tau,
                     &r.wall_ms, &r.f_template, &r.dist};
    for (std::size_t i = 0; i < 8; ++i) *dst[i] = std::strtod(cells[i + 1].c_str(), nullptr);
    rows.push_back(r);
  }
  return rows;
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
  return parse_trace_csv(read_text(path));
}

Mat<double> read_matrix_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<double>> data;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw ConfigError(path + ": non-numeric cell '" + cell + "'");
      row.push_back(v);
    }
    if (!data.empty() && row.size() != data.front().size())
      throw DimensionError(path + ": ragged rows");
    data.push_back(std::move(row));
  }
  if (data.empty()) throw ConfigError(path + ": no data");
  Mat<double> m(Index(data.size()), Index(data.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = data[std::size_t(i)][std::size_t(j)];
  return m;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
}

// ---------------------------------------------------------------- oracle

std::string oracle_json(const OracleInfo& o) {
  ojson j;
  j["source"] = o.source;
  j["f_star"] = o.f_star;
  j["f_star_error"] = o.f_star_error;
  j["lambda_norm"] = o.lambda_norm;
  j["rho0"] = o.rho0;
  j["gamma0"] = o.gamma0;
  j["normB_sq"] = o.normB_sq;
  j["L_h"] = o.L_h;
  j["L_f"] = o.L_f;
  j["x0_dist"] = o.x0_dist;
  j["y0_dist"] = o.y0_dist;
  j["scvx"] = o.scvx;
  return j.dump(2) + "\n";
}

OracleInfo parse_oracle_json(const std::string& text) {
  const json j = json::parse(text);
  OracleInfo o;
  o.f_star = j.at("f_star").get<double>();
  o.f_star_error = get_or<double>(j, "f_star_error", 0.0);
  o.lambda_norm = j.at("lambda_norm").get<double>();
  o.rho0 = j.at("rho0").get<double>();
  o.gamma0 = get_or<double>(j, "gamma0", 0.0);
  o.normB_sq = j.at("normB_sq").get<double>();
  o.L_h = get_or<double>(j, "L_h", 0.0);
  o.L_f = get_or<double>(j, "L_f", 0.0);
  o.x0_dist = get_or<double>(j, "x0_dist", 0.0);
  o.y0_dist = j.at("y0_dist").get<double>();
  o.scvx = get_or<bool>(j, "scvx", false);
  o.source = get_or<std::string>(j, "source", "");
  return o;
}

OracleInfo oracle_info(const ConvergenceTrace<double>& tr, const Reference<double>& ref,
                       double L_f) {
  OracleInfo o;
  o.source = ref.source;
  o.f_star = ref.f_star;
  o.f_star_error = ref.f_star_error;
  o.lambda_norm = ref.lambda_star.size() ? ref.lambda_star.norm() : 0.0;
  o.rho0 = tr.rho0;
  o.gamma0 = tr.gamma0;
  o.normB_sq = tr.normB_sq;
  o.L_h = tr.L_h;
  o.L_f = L_f;
  if (tr.x0.size() && tr.x0.size() == ref.x_star.size()) o.x0_dist = (tr.x0 - ref.x_star).norm();
  if (tr.y0.size() && tr.y0.size() == ref.y_star.size()) o.y0_dist = (tr.y0 - ref.y_star).norm();
  o.scvx = tr.method.find("scvx") != std::string::npos;
  return o;
}

// ---------------------------------------------------------------- bounds

Theorem parse_theorem(const std::string& name) {
  return lookup<Theorem>(
      {{"t1", Theorem::t1}, {"t2", Theorem::t2}, {"t3", Theorem::t3}, {"c1", Theorem::c1}},
      name, "theorem");
}

const char* theorem_name(Theorem t) {
  switch (t) {
    case Theorem::t1: return "t1";
    case Theorem::t2: return "t2";
    case Theorem::t3: return "t3";
    case Theorem::c1: return "c1";
  }
  return "";
}

BoundReport check_bounds(const std::vector<TraceRow>& rows,
                         const std::optional<OracleInfo>& oracle, Theorem theorem,
                         double tolerance, Index k_from) {
  BoundReport rep;
  rep.theorem = theorem;
  if (!oracle) {
    rep.skipped = true;
    rep.notice = std::string("no oracle available: ") + theorem_name(theorem) +
                 " bound check skipped";
    return rep;
  }
  const OracleInfo& o = *oracle;
  if (!(o.rho0 > 0)) throw ConfigError("check_bounds: oracle rho0 must be positive");
  const double lam = o.lambda_norm;
  const double Lh = theorem == Theorem::t3 ? o.L_h : 0.0;
  const double Rp2 = o.gamma0 * o.x0_dist * o.x0_dist + (Lh + o.rho0 * o.normB_sq) * o.y0_dist * o.y0_dist;
  const double Rd = lam + std::sqrt(lam * lam + o.rho0 * Rp2);
  const double M = std::max(o.rho0 * Rp2, 2 * lam * Rd);
  const bool accel = theorem == Theorem::t2 || (theorem != Theorem::t1 && o.scvx);

  rep.worst_slack = std::numeric_limits<double>::infinity();
  auto consider = [&](Index k, double bound, double value) {
    const double slack = (bound - value) / std::max(1.0, std::abs(bound));
    ++rep.checked;
    if (!(slack >= -tolerance)) ++rep.violations;
    if (!(slack >= rep.worst_slack)) {
      rep.worst_slack = slack;
      rep.worst_k = k;
    }
  };
  for (const auto& r : rows) {
    if (r.k < std::max<Index>(1, k_from)) continue;
    const double k = double(r.k), k1 = double(r.k + 1);
    if (theorem == Theorem::c1) {
      const double d = o.y0_dist, L = o.L_f, rho = o.rho0;
      const double bound =
          accel ? 2 * rho * d * d / (k1 * k1) + 8 * (L * L + L * rho * d) / (rho * k1 * k1)
                : (rho * rho * d * d + 4 * L * L + 2 * L * rho * d) / (2 * rho * k);
      consider(r.k, bound, r.objective - o.f_star - o.f_star_error);
      continue;
    }
    const double obj_bound = accel ? 2 * M / (o.rho0 * k1 * k1) : M / (2 * o.rho0 * k);
    const double feas_bound = accel ? 4 * Rd / (o.rho0 * k1 * k1) : Rd / (o.rho0 * k);
    consider(r.k, obj_bound, std::abs(r.f_template - o.f_star) - o.f_star_error);
    consider(r.k, feas_bound, r.dist);
  }
  if (rep.checked == 0) {
    rep.worst_slack = 0;
    rep.notice = "no iterates with k >= 1 to check";
  }
  rep.pass = rep.violations == 0;
  return rep;
}

// ---------------------------------------------------------------- rates

double rate_slope(const std::vector<Index>& k, const std::vector<double>& value, Index from,
                  Index to, Index* skipped) {
  if (k.size() != value.size()) throw DimensionError("rate_slope: column lengths differ");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  Index n = 0, skip = 0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] < from || k[i] > to || k[i] < 1) continue;
    if (!(value[i] > 0) || !std::isfinite(value[i])) {
      ++skip;
      continue;
    }
    const double x = std::log(double(k[i])), y = std::log(value[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (skipped) *skipped = skip;
  if (n < 10)
    throw ConfigError("rate_slope: " + std::to_string(n) +
                      " usable points in the window; at least 10 required");
  const double dn = double(n);
  const double den = sxx - sx * sx / dn;
  if (!(den > 0)) throw ConfigError("rate_slope: degenerate window");
  return (sxy - sx * sy / dn) / den;
}

double rate_slope(const std::vector<TraceRow>& rows, Index from, Index to,
                  const std::string& column, Index* skipped) {
  std::vector<Index> k;
  std::vector<double> v;
  for (const auto& r : rows) {
    k.push_back(r.k);
    if (column == "rel_obj_residual") v.push_back(r.rel_obj_residual);
    else if (column == "feasibility") v.push_back(r.feasibility);
    else if (column == "dist") v.push_back(r.dist);
    else throw ConfigError("rate_slope: unknown column '" + column + "'");
  }
  return rate_slope(k, v, from, to, skipped);
}

// ---------------------------------------------------------------- experiments

ExperimentConfig parse_experiment(const std::string& text, bool paper_scale,
                                  std::optional<std::uint64_t> seed) {
  const json j = json::parse(text);
  check_keys(j, {"benchmark", "seed", "budget", "solvers", "oracle", "crosscheck_budget",
                 "window", "record_timing"},
             "config");
  ExperimentConfig c;
  const json& b = j.at("benchmark");
  c.kind = b.at("kind").get<std::string>();
  auto dp = default_params().find(c.kind);
  if (dp == default_params().end()) throw ConfigError("unknown benchmark '" + c.kind + "'");
  c.params = dp->second;
  for (const auto& [k, v] : b.items()) {
    if (k == "kind") continue;
    if (!c.params.count(k))
      throw ConfigError("benchmark '" + c.kind + "': unknown parameter '" + k + "'");
    c.params[k] = v.is_boolean() ? (v.get<bool>() ? 1.0 : 0.0) : v.get<double>();
  }
  if (paper_scale) {
    if (c.kind == "qp") {
      c.params["p2"] = 2000;
      c.params["n"] = 2000;
    } else if (c.kind == "elastic-sqrt" || c.kind == "sqrt-lasso") {
      c.params["p2"] = 5000;
      c.params["n"] = 1750;
      c.params["s"] = 500;
    } else if (c.kind == "sqrt-composite") {
      c.params["p"] = 5000;
    } else {
      throw ConfigError("paper scale is not available for benchmark '" + c.kind +
                        "' (needs an FFT measurement operator)");
    }
  }
  c.seed = seed ? *seed : get_or<std::uint64_t>(j, "seed", 1);
  c.budget = get_or<Index>(j, "budget", 1000);
  if (c.budget < 1) throw ConfigError("budget must be at least 1");
  c.oracle = get_or<std::string>(j, "oracle", "auto");
  static const std::set<std::string> oracles = {"auto", "enumeration", "active-set",
                                                "crosscheck", "none"};
  if (!oracles.count(c.oracle)) throw ConfigError("unknown oracle mode '" + c.oracle + "'");
  c.crosscheck_budget = get_or<Index>(j, "crosscheck_budget", 20000);
  c.record_timing = get_or<bool>(j, "record_timing", false);
  c.window_from = c.budget / 4;
  c.window_to = c.budget;
  if (j.contains("window")) {
    const auto w = j.at("window").get<std::vector<Index>>();
    if (w.size() != 2) throw ConfigError("window must be [from, to]");
    c.window_from = w[0];
    c.window_to = w[1];
  }
  if (c.window_from < c.budget / 4 || c.window_to > c.budget || c.window_from >= c.window_to)
    throw ConfigError("window must satisfy budget/4 <= from < to <= budget");
  if (!j.contains("solvers") || !j.at("solvers").is_array() || j.at("solvers").empty())
    throw ConfigError("config needs a non-empty solver list");
  std::set<std::string> names;
  Index idx = 0;
  for (const auto& s : j.at("solvers")) {
    SolverSpec spec = parse_solver(s, idx++);
    if (!names.insert(spec.name).second)
      throw ConfigError("duplicate solver name '" + spec.name + "'");
    spec.papa.max_iters = spec.baseline.max_iters = c.budget;
    spec.papa.record_timing = spec.baseline.record_timing = c.record_timing;
    c.solvers.push_back(std::move(spec));
  }
  return c;
}

ProblemInstance<double> build_instance(const ExperimentConfig& cfg) {
  InstanceInfo info;
  info.kind = cfg.kind;
  info.seed = cfg.seed;
  info.params = cfg.params;
  if (cfg.kind == "sqrt-lasso") {
    info.kind = "elastic-sqrt";
    info.params["kappa1"] = 0.0;
  }
  return regenerate(describe(info));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.seed = cfg.seed;
  res.budget = cfg.budget;
  res.window_from = cfg.window_from;
  res.window_to = cfg.window_to;
  ProblemInstance<double> p = build_instance(cfg);
  res.instance = describe(p.info);

  // Composite-shaped solvers need A = ±I and K = {0}; check before running.
  std::optional<CompositeProblem<double>> cp;
  for (const auto& s : cfg.solvers)
    if (s.type != SolverType::papa && !cp) cp = to_composite(p);

  const std::string& mode = cfg.oracle;
  try {
    if (mode == "enumeration" || (mode == "auto" && cfg.kind == "qp" && p.n() <= 12)) {
      res.reference = qp_reference_oracle(p);
    } else if (mode == "active-set" || (mode == "auto" && cfg.kind == "qp")) {
      const auto cc = fstar_crosscheck_oracle(p, cfg.crosscheck_budget);
      try {
        res.reference = qp_active_set_oracle(p, cc.reference.y_star);
      } catch (const OracleError& e) {
        res.notes.push_back(std::string("active-set oracle failed (") + e.what() +
                            "); using the crosscheck estimate");
        res.reference = cc.reference;
        res.low_confidence = cc.low_confidence;
      }
    } else if (mode == "crosscheck" || mode == "auto") {
      const auto cc = fstar_crosscheck_oracle(p, cfg.crosscheck_budget);
      res.reference = cc.reference;
      res.low_confidence = cc.low_confidence;
    }
  } catch (const OracleError& e) {
    res.notes.push_back(std::string("oracle failed: ") + e.what());
  }
  if (res.low_confidence)
    res.notes.push_back("crosscheck gap exceeds 1e-6 relative: bound checks skipped, slopes only");

  const std::optional<double> f_star =
      res.reference ? std::optional<double>(res.reference->f_star) : std::nullopt;
  const double L_f = cp && cp->f.lip ? *cp->f.lip : 0.0;

  for (const auto& spec : cfg.solvers) {
    SolverReport rep;
    rep.name = spec.name;
    rep.trace_file = spec.name + ".csv";
    ConvergenceTrace<double> tr;
    switch (spec.type) {
      case SolverType::papa: tr = run(p, spec.papa); break;
      case SolverType::baseline: tr = run_baseline(p, spec.baseline); break;
      case SolverType::composite: {
        const auto s = resolve_composite(*cp, spec.scheme, spec.composite_rho0);
        tr = run_composite(*cp, s, VecT(VecT::Zero(p.p2())), cfg.budget);
        break;
      }
    }
    rep.method = tr.method;
    rep.notes = tr.notes;
    rep.rows = trace_rows(tr, f_star);
    const auto& last = rep.rows.back();
    rep.iterations = last.k;
    rep.final_objective = last.objective;
    rep.final_rel_residual = last.rel_obj_residual;
    rep.final_feasibility = last.feasibility;
    for (const auto& r : rep.rows)
      if (r.rel_obj_residual <= 1e-8 && r.feasibility <= 1e-8) {
        rep.iterations_to_tol = r.k;
        break;
      }
    Index skipped = 0;
    try {
      rep.objective_slope = rate_slope(rep.rows, cfg.window_from, cfg.window_to,
                                       "rel_obj_residual", &skipped);
      if (skipped) rep.notes.push_back(std::to_string(skipped) +
                                       " nonpositive residuals skipped in the slope window");
    } catch (const ConfigError& e) {
      rep.notes.push_back(std::string("objective slope unavailable: ") + e.what());
    }
    try {
      rep.feasibility_slope =
          rate_slope(rep.rows, cfg.window_from, cfg.window_to, "feasibility", &skipped);
    } catch (const ConfigError& e) {
      rep.notes.push_back(std::string("feasibility slope unavailable: ") + e.what());
    }

    if (res.reference) rep.oracle = oracle_info(tr, *res.reference, L_f);
    const bool restarted = (spec.type == SolverType::papa && spec.papa.restart_period);
    if (const auto th = default_theorem(spec, bool(p.h))) {
      if (restarted) {
        rep.bounds.theorem = *th;
        rep.bounds.skipped = true;
        rep.bounds.notice = "restarted run: no certificate applies";
      } else if (res.low_confidence) {
        rep.bounds.theorem = *th;
        rep.bounds.skipped = true;
        rep.bounds.notice = "low-confidence oracle: bound check skipped";
      } else if (*th == Theorem::c1 && !(L_f > 0)) {
        rep.bounds.theorem = *th;
        rep.bounds.skipped = true;
        rep.bounds.notice = "f has no finite Lipschitz constant: c1 check skipped";
      } else {
        rep.bounds = check_bounds(rep.rows, rep.oracle, *th);
      }
    } else {
      rep.bounds.skipped = true;
      rep.bounds.notice = "no certificate configured for this solver";
      rep.bounds.theorem.reset();
    }
    res.solvers.push_back(std::move(rep));
  }
  return res;
}

std::string summary_json(const ExperimentResult& r) {
  ojson j;
  j["instance"] = ojson::parse(r.instance);
  j["seed"] = r.seed;
  j["budget"] = r.budget;
  j["window"] = {r.window_from, r.window_to};
  if (r.reference) {
    ojson o;
    o["source"] = r.reference->source;
    o["f_star"] = num(r.reference->f_star);
    o["f_star_error"] = num(r.reference->f_star_error);
    o["lambda_norm"] = num(r.reference->lambda_star.size() ? r.reference->lambda_star.norm() : 0.0);
    o["low_confidence"] = r.low_confidence;
    j["oracle"] = o;
  } else {
    j["oracle"] = nullptr;
  }
  j["notes"] = r.notes;
  ojson solvers = ojson::array();
  for (const auto& s : r.solvers) {
    ojson e;
    e["name"] = s.name;
    e["method"] = s.method;
    e["trace"] = s.trace_file;
    e["iterations"] = s.iterations;
    e["final"] = {{"objective", num(s.final_objective)},
                  {"rel_obj_residual", num(s.final_rel_residual)},
                  {"feasibility", num(s.final_feasibility)}};
    e["rate"] = {{"objective_slope", s.objective_slope ? num(*s.objective_slope) : ojson(nullptr)},
                 {"feasibility_slope",
                  s.feasibility_slope ? num(*s.feasibility_slope) : ojson(nullptr)},
                 {"bound_violations", s.bounds.violations},
                 {"worst_slack", s.bounds.skipped ? ojson(nullptr) : num(s.bounds.worst_slack)}};
    e["bounds"] = {{"theorem", s.bounds.theorem ? ojson(theorem_name(*s.bounds.theorem))
                                                : ojson(nullptr)},
                   {"status", s.bounds.skipped ? "skipped" : (s.bounds.pass ? "pass" : "fail")},
                   {"checked", s.bounds.checked},
                   {"violations", s.bounds.violations},
                   {"worst_slack", s.bounds.skipped ? ojson(nullptr) : num(s.bounds.worst_slack)},
                   {"worst_k", s.bounds.worst_k},
                   {"notice", s.bounds.notice}};
    e["iterations_to_1e-8"] = s.iterations_to_tol;
    e["notes"] = s.notes;
    solvers.push_back(e);
  }
  j["solvers"] = solvers;
  return j.dump(2) + "\n";
}

void write_experiment(const ExperimentResult& r, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  for (const auto& s : r.solvers) {
    write_text((dir / s.trace_file).string(), trace_csv(s.rows));
    if (s.oracle) write_text((dir / (s.name + ".oracle.json")).string(), oracle_json(*s.oracle));
  }
  write_text((dir / "instance.json").string(), ojson::parse(r.instance).dump(2) + "\n");
  write_text((dir / "summary.json").string(), summary_json(r));
}

}  // namespace papa
