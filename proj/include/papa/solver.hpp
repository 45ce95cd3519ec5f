#pragma once

#include "papa/common.hpp"
#include "papa/linear_map.hpp"
#include "papa/problem.hpp"

#include <optional>
#include <string>
#include <vector>

namespace papa {

enum class Algorithm { papa, scvx, conic };
enum class StepOption { averaging, proximal };
enum class TauRule { standard, tighter };
enum class XMode { exact, linearized };
enum class ThreeTermCase { automatic, case_i, case_ii };
// Restart shift update with s = w − proj_K(w): additive λ⁰ ← λ⁰ + ρs, or
// multiplier λ⁰ ← ρs (the augmented-Lagrangian estimate).
enum class ShiftUpdate { additive, multiplier };

template <typename Scalar>
struct SolverConfig {
  Algorithm algorithm = Algorithm::papa;
  std::optional<Scalar> rho0;
  std::optional<Scalar> gamma0;
  std::optional<Scalar> mu_g;
  // Operator norm overrides; estimated by power iteration when absent.
  std::optional<Scalar> normA_sq, normB_sq;
  StepOption option = StepOption::averaging;
  TauRule tau_rule = TauRule::standard;
  XMode x_mode = XMode::exact;
  ThreeTermCase three_term = ThreeTermCase::automatic;
  std::optional<Index> restart_period;
  ShiftUpdate shift_update = ShiftUpdate::multiplier;
  Index max_iters = 1000;
  bool record_diagnostics = false;
  bool accelerate = true;
  // Run even when a step-size precondition fails (noted in the trace).
  bool allow_precondition_violation = false;
  bool record_timing = false;
};

// A config with every default filled in for a particular problem.
template <typename Scalar>
struct Settings : SolverConfig<Scalar> {
  Scalar rho0_v = 0, gamma0_v = 0, mu_g_v = 0;
  Scalar normA = 0, normB = 0;  // squared norms
  Scalar L_h = 0, mu_h = 0;
  ThreeTermCase case_v = ThreeTermCase::automatic;
  std::vector<std::string> notes;
};

template <typename Scalar>
struct SolverState {
  using VecT = Vec<Scalar>;
  Index k = 0;        // iterations performed
  Index k_local = 0;  // iterations since the last restart
  VecT x, y, x_hat, y_hat, x_tilde, y_tilde, lambda0;
  Scalar tau = 1, rho = 0, gamma = 0;
  Scalar rho_prev = 0;  // ρ_{k−1}; 0 before the first step
  Index restarts = 0;
};

namespace detail {

template <typename Scalar>
bool exceeds(Scalar v, Scalar limit) {
  return v > limit * (1 + Scalar(1e-12));
}

}  // namespace detail

template <typename Scalar>
Settings<Scalar> resolve(const ProblemInstance<Scalar>& p,
                         const SolverConfig<Scalar>& cfg) {
  p.validate();
  Settings<Scalar> s;
  static_cast<SolverConfig<Scalar>&>(s) = cfg;
  if (cfg.max_iters < 0) throw ConfigError("max_iters must be nonnegative");
  if (cfg.restart_period && *cfg.restart_period < 2)
    throw ConfigError("restart_period must be at least 2");
  if (cfg.x_mode == XMode::exact && !p.exact_x_solver)
    throw ConfigError("exact x-mode requires the problem's exact x-solver");
  if (cfg.algorithm == Algorithm::scvx && !cfg.accelerate)
    throw ConfigError("the non-accelerated mode applies to the non-strongly convex method only");

  s.normB = cfg.normB_sq ? *cfg.normB_sq : op_norm_sq(p.constraint.B);
  s.normA = cfg.normA_sq ? *cfg.normA_sq
                         : (cfg.x_mode == XMode::linearized ? op_norm_sq(p.constraint.A)
                                                            : Scalar(0));
  if (!(s.normB > Scalar(0))) throw ConfigError("‖B‖ must be positive");
  if (p.h) {
    s.L_h = p.h->lipschitz;
    s.mu_h = p.h->mu;
  }
  s.gamma0_v = cfg.gamma0 ? *cfg.gamma0 : Scalar(0);
  if (s.gamma0_v < 0) throw ConfigError("gamma0 must be nonnegative");

  if (cfg.mu_g) {
    s.mu_g_v = *cfg.mu_g;
  } else if (p.g.mu > 0) {
    s.mu_g_v = p.g.mu;
  } else if (cfg.algorithm == Algorithm::scvx) {
    s.mu_g_v = Scalar(0.1);
    s.notes.push_back("mu_g undeclared and g not strongly convex; using 0.1");
  }

  if (cfg.algorithm != Algorithm::scvx) {
    s.rho0_v = cfg.rho0 ? *cfg.rho0 : Scalar(1) / std::sqrt(s.normB);
  } else if (!p.h) {
    const Scalar limit = s.mu_g_v / (2 * s.normB);
    s.rho0_v = cfg.rho0 ? *cfg.rho0 : limit;
    if (cfg.tau_rule == TauRule::standard && detail::exceeds(s.rho0_v, limit)) {
      const std::string msg = "rho0 = " + std::to_string(double(s.rho0_v)) +
                              " exceeds mu_g/(2‖B‖²) = " + std::to_string(double(limit));
      if (!cfg.allow_precondition_violation) throw ConfigError(msg);
      s.notes.push_back("precondition overridden: " + msg);
    }
  } else {
    ThreeTermCase c = cfg.three_term;
    if (c == ThreeTermCase::automatic)
      c = s.mu_g_v > 0 ? ThreeTermCase::case_i
          : s.L_h < 2 * s.mu_h ? ThreeTermCase::case_ii : ThreeTermCase::case_i;
    s.case_v = c;
    Scalar limit;
    std::string failed;
    if (c == ThreeTermCase::case_i) {
      limit = s.mu_g_v / (2 * s.normB);
      if (!(s.mu_g_v > 0)) failed = "mu_g > 0";
    } else {
      limit = (s.mu_g_v + 2 * s.mu_h - s.L_h) / (2 * s.normB);
      if (!(s.L_h < 2 * s.mu_h)) failed = "L_h < 2 mu_h";
    }
    s.rho0_v = cfg.rho0 ? *cfg.rho0 : limit;
    if (failed.empty() && detail::exceeds(s.rho0_v, limit))
      failed = c == ThreeTermCase::case_i ? "rho0 <= mu_g/(2‖B‖²)"
                                          : "rho0 <= (mu_g + 2 mu_h - L_h)/(2‖B‖²)";
    if (!failed.empty()) {
      const std::string msg = "three-term step precondition failed: " + failed;
      if (!cfg.allow_precondition_violation) throw ConfigError(msg);
      s.notes.push_back("precondition overridden: " + msg);
    }
  }
  if (!(s.rho0_v > 0)) throw ConfigError("rho0 must be positive");
  return s;
}

// Initial state. Without an explicit x⁰ the x-subproblem at (0, y⁰) is
// solved so that F(z⁰) is finite.
template <typename Scalar>
SolverState<Scalar> init_state(const ProblemInstance<Scalar>& p,
                               const Settings<Scalar>& s,
                               std::optional<Vec<Scalar>> x0 = std::nullopt,
                               std::optional<Vec<Scalar>> y0 = std::nullopt) {
  SolverState<Scalar> st;
  st.y = y0 ? *y0 : Vec<Scalar>::Zero(p.p2());
  check_length(p.p2(), st.y.size(), "init_state: y0");
  st.lambda0 = Vec<Scalar>::Zero(p.n());
  if (x0) {
    st.x = *x0;
  } else if (p.exact_x_solver) {
    st.x = p.exact_x_solver(Vec<Scalar>::Zero(p.p1()), st.y, s.rho0_v, Scalar(0),
                            st.lambda0);
  } else {
    st.x = Vec<Scalar>::Zero(p.p1());
  }
  check_length(p.p1(), st.x.size(), "init_state: x0");
  st.x_hat = st.x_tilde = st.x;
  st.y_hat = st.y_tilde = st.y;
  st.tau = 1;
  st.rho = s.rho0_v;
  st.gamma = s.gamma0_v;
  return st;
}

}  // namespace papa
